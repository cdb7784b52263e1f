#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treeloc/certify.hpp"
#include "treeloc/tree.hpp"
#include "treeloc/zeta.hpp"

namespace treeloc {

// Monte-Carlo block of a run configuration.
struct McConfig {
  long long n_samples = 100000;
  int depth_buffer = 40;
  double epsilon = 0.01;
  double s = 0.1;
  std::vector<int> n_list;  // spheres to estimate; empty lets the caller derive them
};

// Full experiment description.  Parsed from JSON; the canonical dump (sorted
// keys, normalized scalar-vs-list fields) is what gets hashed into every
// output file.
struct RunConfig {
  std::string model = "tree";  // "tree" | "chain"
  ChainMode chain_mode = ChainMode::plain;
  RadialDisorder nu0 = RadialDisorder::uniform(1.0);
  RadialDisorder nu = RadialDisorder::uniform(1.0);
  TransversalDisorder sigma = TransversalDisorder::trivial();
  std::vector<double> kappas{0.0};
  std::vector<double> energies{0.0};
  SearchParams search;
  McConfig mc;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::string certificate_path;  // optional: simulate compares its fit to this
};

// Throws std::invalid_argument on malformed or inadmissible configs (in
// particular an atom-law radial disorder: a bounded density is required).
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

std::string canonical_config_dump(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

// Certificates serialize with every Certificate field plus grid resolution,
// quadrature order, the config hash and the tool version; loading re-checks
// the Certificate invariants before returning.
std::string certificate_to_json(const Certificate& cert, std::uint64_t cfg_hash);
Certificate certificate_from_json(const std::string& text);

std::string zeta_certificate_to_json(const ZetaCertificate& zc, std::uint64_t cfg_hash);

// CSV with columns n,E,epsilon,s,kappa,mean,stderr,n_samples,seed after one
// comment line carrying tool version and config hash.  All reals print with
// %.17g so reruns are byte-identical.
std::string estimates_to_csv(const std::vector<MomentEstimate>& rows, double kappa,
                             std::uint64_t seed, std::uint64_t cfg_hash);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace treeloc
