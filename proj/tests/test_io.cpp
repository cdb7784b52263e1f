#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <cmath>
#include <string>

#include "treeloc/errors.hpp"
#include "treeloc/io.hpp"

using namespace treeloc;

namespace {

const char* kFullConfig = R"({
  "model": "tree",
  "disorder": {
    "nu0": {"kind": "uniform", "K": 1.0},
    "nu": {"kind": "piecewise", "K": 2.0,
           "pieces": [{"lo": -2.0, "hi": 0.0, "coeffs": [0.25]},
                      {"lo": 0.0, "hi": 2.0, "coeffs": [0.25]}]},
    "sigma": {"kind": "atoms",
              "atoms": [{"p0": 1.0, "p1": -1.0, "weight": 0.5},
                        {"p0": -1.0, "p1": 1.0, "weight": 0.5}],
              "sup0": 0.5, "sup1": 0.5}
  },
  "kappa": [0.0, 0.1],
  "energy": 0.0,
  "search": {"s_scan": [0.1, 0.05], "delta_prime": 0.99, "half_width": 0.25,
             "max_shrinks": 3, "energy_samples": 5, "m_cap": 200, "finder_tol": 1e-10},
  "grid": {"n_nodes": 1024},
  "quadrature": {"order": 48},
  "mc": {"n_samples": 5000, "depth_buffer": 12, "epsilon": 0.02, "s": 0.1,
         "n_list": [2, 4, 6]},
  "seed": 77,
  "output_dir": "/tmp/out"
})";

Certificate sample_certificate() {
  Certificate c;
  c.kind = SystemKind::tree;
  c.E0 = 0.0;
  c.interval_lo = -0.5;
  c.interval_hi = 0.5;
  c.s = 0.1;
  c.m = 30;
  c.delta = 0.984;
  c.ell = std::pow(c.delta, -1.0 / c.m);
  c.A = 2.17;
  c.zeta = Complex(0.0, 1.0399733);
  c.zeta_residual = 1e-12;
  c.key_inf = 0.00245;
  c.kappa = 0.0;
  c.kappa_max = 0.0;
  c.grid_resolution = 512;
  c.quad_order = 64;
  c.route = "direct";
  c.sup_F = 1.017;
  return c;
}

}  // namespace

TEST_CASE("config parsing reaches every field and the canonical dump is a fixed point") {
  const RunConfig cfg = parse_config_text(kFullConfig);
  CHECK(cfg.model == "tree");
  CHECK(cfg.nu.K() == 2.0);
  CHECK(cfg.nu.sup_density() == doctest::Approx(0.25));
  CHECK(cfg.nu0.K() == 1.0);
  CHECK(cfg.sigma.atoms().size() == 2);
  CHECK(cfg.sigma.has_marginal_sups());
  CHECK(cfg.kappas == std::vector<double>{0.0, 0.1});
  CHECK(cfg.energies == std::vector<double>{0.0});
  CHECK(cfg.search.s_scan == std::vector<double>{0.1, 0.05});
  CHECK(cfg.search.delta_prime == 0.99);
  CHECK(cfg.search.initial_half_width == 0.25);
  CHECK(cfg.search.max_shrinks == 3);
  CHECK(cfg.search.energy_samples == 5);
  CHECK(cfg.search.m_cap == 200);
  CHECK(cfg.search.finder_tol == 1e-10);
  CHECK(cfg.search.grid_nodes == 1024);
  CHECK(cfg.search.quad_order == 48);
  CHECK(cfg.mc.n_samples == 5000);
  CHECK(cfg.mc.depth_buffer == 12);
  CHECK(cfg.mc.epsilon == 0.02);
  CHECK(cfg.mc.n_list == std::vector<int>{2, 4, 6});
  CHECK(cfg.seed == 77);
  CHECK(cfg.output_dir == "/tmp/out");

  const std::string canon = canonical_config_dump(cfg);
  const RunConfig cfg2 = parse_config_text(canon);
  CHECK(canonical_config_dump(cfg2) == canon);
  CHECK(config_hash(cfg2) == config_hash(cfg));
}

TEST_CASE("the hash ignores key order but reacts to every value change") {
  const RunConfig a = parse_config_text(R"({"seed": 5, "energy": 1.5, "model": "tree"})");
  const RunConfig b = parse_config_text(R"({"model": "tree", "energy": 1.5, "seed": 5})");
  CHECK(config_hash(a) == config_hash(b));

  const RunConfig c = parse_config_text(R"({"model": "tree", "energy": 1.5, "seed": 6})");
  CHECK(config_hash(a) != config_hash(c));

  CHECK(hash_hex(config_hash(a)).size() == 16);
}

TEST_CASE("defaults apply when optional blocks are missing") {
  const RunConfig cfg = parse_config_text("{}");
  CHECK(cfg.model == "tree");
  CHECK(cfg.chain_mode == ChainMode::plain);
  CHECK(cfg.kappas == std::vector<double>{0.0});
  CHECK(cfg.energies == std::vector<double>{0.0});
  CHECK(cfg.search.grid_nodes == 4096);
  CHECK(cfg.mc.n_samples == 100000);
  CHECK(cfg.seed == 1);
}

TEST_CASE("inadmissible or malformed configs are rejected with clear messages") {
  CHECK_THROWS_AS(parse_config_text("not json at all"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text(R"({"model": "lattice"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text(R"({"kappa": -1.0})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text(R"({"kappa": []})"), std::invalid_argument);

  // Atom radial laws are inadmissible: the theory needs a bounded density.
  const char* atom_nu = R"({"disorder": {"nu": {"kind": "atoms", "values": [-1, 1]}}})";
  try {
    parse_config_text(atom_nu);
    FAIL("expected a rejection of the atom radial law");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("density required") != std::string::npos);
  }
}

TEST_CASE("certificates round-trip through JSON with self-validation on load") {
  const Certificate cert = sample_certificate();
  const std::string text = certificate_to_json(cert, 0xabcdef1234ull);
  CHECK(text.find("treeloc.certificate/1") != std::string::npos);
  CHECK(text.find(hash_hex(0xabcdef1234ull)) != std::string::npos);

  const Certificate back = certificate_from_json(text);
  CHECK(back.kind == cert.kind);
  CHECK(back.E0 == cert.E0);
  CHECK(back.interval_lo == cert.interval_lo);
  CHECK(back.interval_hi == cert.interval_hi);
  CHECK(back.s == cert.s);
  CHECK(back.m == cert.m);
  CHECK(back.delta == cert.delta);
  CHECK(back.ell == cert.ell);
  CHECK(back.A == cert.A);
  CHECK(back.zeta == cert.zeta);
  CHECK(back.zeta_residual == cert.zeta_residual);
  CHECK(back.key_inf == cert.key_inf);
  CHECK(back.kappa == cert.kappa);
  CHECK(back.kappa_max == cert.kappa_max);
  CHECK(back.grid_resolution == cert.grid_resolution);
  CHECK(back.quad_order == cert.quad_order);
  CHECK(back.route == cert.route);
  CHECK(back.sup_F == cert.sup_F);
}

TEST_CASE("corrupted certificates fail to load") {
  const std::string text = certificate_to_json(sample_certificate(), 1);

  std::string broken = text;
  const auto pos = broken.find("\"delta\": 0.984");
  REQUIRE(pos != std::string::npos);
  broken.replace(pos, 14, "\"delta\": 1.204");
  CHECK_THROWS_AS(certificate_from_json(broken), InconsistencyError);

  std::string wrong_format = text;
  const auto fpos = wrong_format.find("treeloc.certificate/1");
  REQUIRE(fpos != std::string::npos);
  wrong_format.replace(fpos, 21, "treeloc.certificate/9");
  CHECK_THROWS_AS(certificate_from_json(wrong_format), std::invalid_argument);

  CHECK_THROWS_AS(certificate_from_json("{\"format\": \"treeloc.certificate/1\"}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(certificate_from_json("garbage"), std::invalid_argument);
}

TEST_CASE("zeta reports serialize with the search box diagnostics") {
  ZetaCertificate zc;
  zc.zeta = UpperHalfPoint::from(Complex(0.0, 1.27));
  zc.abs_zeta = 1.27;
  zc.residual = 2e-10;
  zc.inf_value = 0.01;
  zc.tail_value = 0.478;
  zc.box = {2.0, 2.0, 0.125, 256};
  const std::string text = zeta_certificate_to_json(zc, 42);
  CHECK(text.find("treeloc.zeta/1") != std::string::npos);
  CHECK(text.find("search_box") != std::string::npos);
  CHECK(text.find("gamma_samples") != std::string::npos);
  CHECK(text.find("inf_value") != std::string::npos);
}

TEST_CASE("estimate tables carry the provenance line and reparse exactly") {
  MomentEstimate r1{3, 0.0, 0.01, 0.1, 0.12345678901234567, 0.001234567890123456, 1000};
  MomentEstimate r2{6, -2.0, 0.01, 0.1, 3.14e-5, 1.2e-6, 1000};
  const std::string csv = estimates_to_csv({r1, r2}, 0.25, 99, 0xfeed);

  const auto first_nl = csv.find('\n');
  const std::string comment = csv.substr(0, first_nl);
  CHECK(comment.rfind("# treeloc", 0) == 0);
  CHECK(comment.find(hash_hex(0xfeed)) != std::string::npos);

  const auto second_nl = csv.find('\n', first_nl + 1);
  CHECK(csv.substr(first_nl + 1, second_nl - first_nl - 1) ==
        "n,E,epsilon,s,kappa,mean,stderr,n_samples,seed");

  // The mean column reparses to the exact double that went in.
  const std::string row = csv.substr(second_nl + 1, csv.find('\n', second_nl + 1) - second_nl - 1);
  std::size_t start = 0;
  for (int c = 0; c < 5; ++c) start = row.find(',', start) + 1;
  const double mean_back = std::strtod(row.c_str() + start, nullptr);
  CHECK(mean_back == r1.mean);
  CHECK(row.back() == '9');  // seed column closes the row
}

TEST_CASE("text files round-trip and missing files are reported") {
  const std::string path = "/tmp/treeloc_io_test.txt";
  const std::string content = "line1\nline2\n";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  CHECK_THROWS_AS(read_text_file("/tmp/definitely_not_here_8271.txt"), std::invalid_argument);
}
