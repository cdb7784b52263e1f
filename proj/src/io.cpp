#include "treeloc/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "treeloc/errors.hpp"
#include "treeloc/numerics.hpp"

namespace treeloc {

namespace {

using nlohmann::json;

constexpr const char* kCertificateFormat = "treeloc.certificate/1";
constexpr const char* kZetaFormat = "treeloc.zeta/1";

std::vector<double> as_list(const json& j, const char* what) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<double>());
  } else {
    throw std::invalid_argument(std::string("config: ") + what + " must be a number or a list");
  }
  if (out.empty()) {
    throw std::invalid_argument(std::string("config: ") + what + " list is empty");
  }
  return out;
}

RadialDisorder parse_radial(const json& j, const char* name) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    return RadialDisorder::uniform(j.at("K").get<double>());
  }
  if (kind == "piecewise") {
    std::vector<PolyPiece> pieces;
    for (const auto& pj : j.at("pieces")) {
      PolyPiece p;
      p.lo = pj.at("lo").get<double>();
      p.hi = pj.at("hi").get<double>();
      p.coeffs = pj.at("coeffs").get<std::vector<double>>();
      pieces.push_back(std::move(p));
    }
    return RadialDisorder(std::move(pieces), j.at("K").get<double>());
  }
  if (kind == "atoms") {
    throw std::invalid_argument(std::string("config: ") + name +
                                ": density required (atom laws violate the bounded-density "
                                "assumption)");
  }
  throw std::invalid_argument(std::string("config: ") + name + ": unknown kind '" + kind + "'");
}

json radial_to_json(const RadialDisorder& nu) {
  json pieces = json::array();
  for (const PolyPiece& p : nu.pieces()) {
    pieces.push_back({{"lo", p.lo}, {"hi", p.hi}, {"coeffs", p.coeffs}});
  }
  return {{"kind", "piecewise"}, {"K", nu.K()}, {"pieces", pieces}};
}

TransversalDisorder parse_sigma(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "trivial") return TransversalDisorder::trivial();
  if (kind == "two_colour_swap") return TransversalDisorder::two_colour_swap();
  if (kind == "uniform_surrogate") {
    return TransversalDisorder::uniform_product_surrogate(j.value("order", 32));
  }
  if (kind == "atoms") {
    std::vector<TransversalAtom> atoms;
    for (const auto& aj : j.at("atoms")) {
      atoms.push_back(
          {aj.at("p0").get<double>(), aj.at("p1").get<double>(), aj.at("weight").get<double>()});
    }
    return TransversalDisorder(std::move(atoms), j.value("sup0", -1.0), j.value("sup1", -1.0));
  }
  throw std::invalid_argument("config: sigma: unknown kind '" + kind + "'");
}

json sigma_to_json(const TransversalDisorder& sigma) {
  json atoms = json::array();
  for (const TransversalAtom& a : sigma.atoms()) {
    atoms.push_back({{"p0", a.p0}, {"p1", a.p1}, {"weight", a.weight}});
  }
  json out = {{"kind", "atoms"}, {"atoms", atoms}};
  if (sigma.has_marginal_sups()) {
    out["sup0"] = sigma.marginal_sup0();
    out["sup1"] = sigma.marginal_sup1();
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  try {
    RunConfig cfg;
    cfg.model = j.value("model", std::string("tree"));
    if (cfg.model != "tree" && cfg.model != "chain") {
      throw std::invalid_argument("config: model must be 'tree' or 'chain'");
    }
    const std::string mode = j.value("chain_mode", std::string("plain"));
    if (mode == "plain") {
      cfg.chain_mode = ChainMode::plain;
    } else if (mode == "tree_reduced") {
      cfg.chain_mode = ChainMode::tree_reduced;
    } else {
      throw std::invalid_argument("config: chain_mode must be 'plain' or 'tree_reduced'");
    }

    if (j.contains("disorder")) {
      const json& d = j.at("disorder");
      if (d.contains("nu0")) cfg.nu0 = parse_radial(d.at("nu0"), "nu0");
      if (d.contains("nu")) cfg.nu = parse_radial(d.at("nu"), "nu");
      if (d.contains("sigma")) cfg.sigma = parse_sigma(d.at("sigma"));
    }
    if (j.contains("kappa")) cfg.kappas = as_list(j.at("kappa"), "kappa");
    for (double k : cfg.kappas) {
      if (!(k >= 0.0)) throw std::invalid_argument("config: kappa must be >= 0");
    }
    if (j.contains("energy")) cfg.energies = as_list(j.at("energy"), "energy");

    if (j.contains("search")) {
      const json& s = j.at("search");
      if (s.contains("s_scan")) cfg.search.s_scan = s.at("s_scan").get<std::vector<double>>();
      cfg.search.delta_prime = s.value("delta_prime", cfg.search.delta_prime);
      cfg.search.initial_half_width = s.value("half_width", cfg.search.initial_half_width);
      cfg.search.max_shrinks = s.value("max_shrinks", cfg.search.max_shrinks);
      cfg.search.energy_samples = s.value("energy_samples", cfg.search.energy_samples);
      cfg.search.m_cap = s.value("m_cap", cfg.search.m_cap);
      cfg.search.finder_tol = s.value("finder_tol", cfg.search.finder_tol);
    }
    if (j.contains("grid")) cfg.search.grid_nodes = j.at("grid").value("n_nodes", cfg.search.grid_nodes);
    if (j.contains("quadrature")) {
      cfg.search.quad_order = j.at("quadrature").value("order", cfg.search.quad_order);
    }

    if (j.contains("mc")) {
      const json& m = j.at("mc");
      cfg.mc.n_samples = m.value("n_samples", cfg.mc.n_samples);
      cfg.mc.depth_buffer = m.value("depth_buffer", cfg.mc.depth_buffer);
      cfg.mc.epsilon = m.value("epsilon", cfg.mc.epsilon);
      cfg.mc.s = m.value("s", cfg.mc.s);
      if (m.contains("n_list")) cfg.mc.n_list = m.at("n_list").get<std::vector<int>>();
    }

    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.certificate_path = j.value("certificate", cfg.certificate_path);
    return cfg;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) { return parse_config_text(read_text_file(path)); }

std::string canonical_config_dump(const RunConfig& cfg) {
  json j;
  j["model"] = cfg.model;
  j["chain_mode"] = cfg.chain_mode == ChainMode::plain ? "plain" : "tree_reduced";
  j["disorder"]["nu0"] = radial_to_json(cfg.nu0);
  j["disorder"]["nu"] = radial_to_json(cfg.nu);
  j["disorder"]["sigma"] = sigma_to_json(cfg.sigma);
  j["kappa"] = cfg.kappas;
  j["energy"] = cfg.energies;
  j["search"] = {{"s_scan", cfg.search.s_scan},
                 {"delta_prime", cfg.search.delta_prime},
                 {"half_width", cfg.search.initial_half_width},
                 {"max_shrinks", cfg.search.max_shrinks},
                 {"energy_samples", cfg.search.energy_samples},
                 {"m_cap", cfg.search.m_cap},
                 {"finder_tol", cfg.search.finder_tol}};
  j["grid"] = {{"n_nodes", cfg.search.grid_nodes}};
  j["quadrature"] = {{"order", cfg.search.quad_order}};
  j["mc"] = {{"n_samples", cfg.mc.n_samples},
             {"depth_buffer", cfg.mc.depth_buffer},
             {"epsilon", cfg.mc.epsilon},
             {"s", cfg.mc.s},
             {"n_list", cfg.mc.n_list}};
  j["seed"] = cfg.seed;
  // output_dir and certificate_path are I/O plumbing, not part of the
  // experiment: the hash must agree for runs that differ only in where
  // results land or what they are compared against.
  return j.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(canonical_config_dump(cfg)); }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string certificate_to_json(const Certificate& cert, std::uint64_t cfg_hash) {
  json j;
  j["format"] = kCertificateFormat;
  j["tool_version"] = kVersion;
  j["config_hash"] = hash_hex(cfg_hash);
  j["kind"] = cert.kind == SystemKind::tree ? "tree" : "chain";
  j["E0"] = cert.E0;
  j["interval"] = {cert.interval_lo, cert.interval_hi};
  j["s"] = cert.s;
  j["m"] = cert.m;
  j["delta"] = cert.delta;
  j["ell"] = cert.ell;
  j["A"] = cert.A;
  j["zeta"] = {{"re", cert.zeta.real()}, {"im", cert.zeta.imag()}};
  j["zeta_residual"] = cert.zeta_residual;
  j["key_inf"] = cert.key_inf;
  j["kappa"] = cert.kappa;
  j["kappa_max"] = cert.kappa_max;
  j["grid_resolution"] = cert.grid_resolution;
  j["quad_order"] = cert.quad_order;
  j["route"] = cert.route;
  j["sup_F"] = cert.sup_F;
  return j.dump(2);
}

Certificate certificate_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("certificate: not valid JSON: ") + e.what());
  }
  Certificate cert;
  try {
    if (j.at("format").get<std::string>() != kCertificateFormat) {
      throw std::invalid_argument("certificate: unknown format marker");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "tree") {
      cert.kind = SystemKind::tree;
    } else if (kind == "chain") {
      cert.kind = SystemKind::chain;
    } else {
      throw std::invalid_argument("certificate: unknown kind '" + kind + "'");
    }
    cert.E0 = j.at("E0").get<double>();
    cert.interval_lo = j.at("interval").at(0).get<double>();
    cert.interval_hi = j.at("interval").at(1).get<double>();
    cert.s = j.at("s").get<double>();
    cert.m = j.at("m").get<int>();
    cert.delta = j.at("delta").get<double>();
    cert.ell = j.at("ell").get<double>();
    cert.A = j.at("A").get<double>();
    cert.zeta = Complex(j.at("zeta").at("re").get<double>(), j.at("zeta").at("im").get<double>());
    cert.zeta_residual = j.at("zeta_residual").get<double>();
    cert.key_inf = j.at("key_inf").get<double>();
    cert.kappa = j.at("kappa").get<double>();
    cert.kappa_max = j.at("kappa_max").get<double>();
    cert.grid_resolution = j.at("grid_resolution").get<int>();
    cert.quad_order = j.at("quad_order").get<int>();
    cert.route = j.at("route").get<std::string>();
    cert.sup_F = j.at("sup_F").get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("certificate: missing or mistyped field: ") +
                                e.what());
  }
  check_certificate(cert);  // self-validation on load
  return cert;
}

std::string zeta_certificate_to_json(const ZetaCertificate& zc, std::uint64_t cfg_hash) {
  json j;
  j["format"] = kZetaFormat;
  j["tool_version"] = kVersion;
  j["config_hash"] = hash_hex(cfg_hash);
  j["zeta"] = {{"re", zc.zeta.re}, {"im", zc.zeta.im}};
  j["abs_zeta"] = zc.abs_zeta;
  j["residual"] = zc.residual;
  j["inf_value"] = zc.inf_value;
  j["tail_value"] = zc.tail_value;
  j["search_box"] = {{"a0", zc.box.a0},
                     {"b0", zc.box.b0},
                     {"b1", zc.box.b1},
                     {"gamma_samples", zc.box.gamma_samples}};
  return j.dump(2);
}

std::string estimates_to_csv(const std::vector<MomentEstimate>& rows, double kappa,
                             std::uint64_t seed, std::uint64_t cfg_hash) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "# treeloc " << kVersion << " config_hash=" << hash_hex(cfg_hash) << "\n";
  out << "n,E,epsilon,s,kappa,mean,stderr,n_samples,seed\n";
  for (const MomentEstimate& r : rows) {
    out << r.n << ',' << fmt(r.E) << ',' << fmt(r.epsilon) << ',' << fmt(r.s) << ','
        << fmt(kappa) << ',' << fmt(r.mean) << ',' << fmt(r.std_error) << ',' << r.n_samples
        << ',' << seed << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
  if (!out) throw std::invalid_argument("write failed: " + path);
}

}  // namespace treeloc
