#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "drp/harness.hpp"

using namespace drp;
using nlohmann::json;

TEST_CASE("grid syntax") {
  const auto g = parse_grid("-30:30:7");
  REQUIRE(g.size() == 7);
  CHECK(g.front() == -30.0);
  CHECK(g.back() == 30.0);
  CHECK(g[1] == doctest::Approx(-20.0));
  CHECK(parse_grid("2.5") == std::vector<double>{2.5});
  CHECK(parse_grid("1,2,4") == std::vector<double>{1, 2, 4});
  CHECK(parse_grid("5:5:1") == std::vector<double>{5});
  CHECK_THROWS_AS(parse_grid("0:1:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_grid("0:1"), InvalidArgument);
  CHECK_THROWS_AS(parse_grid("a:b:c"), InvalidArgument);
  CHECK_THROWS_AS(parse_grid(""), InvalidArgument);
}

TEST_CASE("config round trip and rejection") {
  RunConfig c = default_config("one_nitrogen");
  c.sweep.j0_mhz = parse_grid("0:10:3");
  c.sweep.observables = {"chi", "c_r_st"};
  c.setup.rates.kb0 = 3.5;
  const json j = config_to_json(c);
  const RunConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(config_hash(j) == config_hash(config_to_json(back)));
  CHECK(config_hash(j).size() == 16);

  json bad = j;
  bad["rates"]["kb_0"] = 1.0;
  CHECK_THROWS(config_from_json(bad));
  bad = j;
  bad["extra"] = json::object();
  CHECK_THROWS(config_from_json(bad));

  json partial = {{"sweep", {{"j0_mhz", "-5:5:3"}, {"observables", {"gamma"}}}}};
  const RunConfig p = config_from_json(partial);
  CHECK(p.sweep.j0_mhz.size() == 3);
  CHECK(p.setup.rates.kb0 == 2.0);

  RunConfig wrong = c;
  wrong.sweep.observables = {"chirality"};
  CHECK_THROWS_AS(wrong.validate(), InvalidArgument);

  for (const auto& name : {"one_nitrogen", "one_nitrogen_axial_zero_perp", "fad_trp_4spin"}) {
    const RunConfig d = default_config(name);
    CHECK(config_to_json(config_from_json(config_to_json(d))) == config_to_json(d));
  }
}

TEST_CASE("grid order is row-major") {
  SweepSpec s;
  s.j0_mhz = {1, 2};
  s.nu_d_mhz = {3, 4, 5};
  s.delta_d = {6, 7};
  const auto pts = grid_points(s);
  REQUIRE(pts.size() == 12);
  CHECK(s.size() == 12);
  CHECK(pts[0].j0_mhz == 1);
  CHECK(pts[0].nu_d_mhz == 3);
  CHECK(pts[1].delta_d == 7);
  CHECK(pts[2].nu_d_mhz == 4);
  CHECK(pts[6].j0_mhz == 2);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i].index == i);
}

TEST_CASE("point setup") {
  const RunConfig c = default_config();
  const auto st = point_setup(c.setup, {0, 5.0, 0.0, 2.0, 0.0});
  CHECK(st.driving.kind == DrivingKind::Static);
  CHECK(st.j0_mhz == 5.0);
  const auto h = point_setup(c.setup, {0, 5.0, 3.0, 2.0, 0.0});
  CHECK(h.driving.kind == DrivingKind::Harmonic);
  const auto d = point_setup(c.setup, {0, 5.0, 3.0, 2.0, 4.0});
  CHECK(d.driving.kind == DrivingKind::Damped);
  CHECK(d.driving.tau == 4.0);
}

TEST_CASE("observable columns") {
  SweepSpec s;
  s.observables = {"chi", "c_l1_ud", "e_n", "global_l1_st"};
  const std::vector<std::string> expected{"chi",     "c_l1_ud_avg",      "c_l1_ud_diff",     "e_n_avg",
                                          "e_n_diff", "global_l1_st_avg", "global_l1_st_diff"};
  CHECK(observable_columns(s) == expected);
}

TEST_CASE("sweep output is independent of worker count") {
  RunConfig c = default_config();
  c.sweep.j0_mhz = parse_grid("-10:10:3");
  c.sweep.nu_d_mhz = {0.0, 3.0};
  c.sweep.delta_d = {2.0};
  c.sweep.observables = {"chi", "phi_par"};
  std::ostringstream a, b;
  write_sweep_csv(a, c.sweep, run_sweep(c, 1));
  write_sweep_csv(b, c.sweep, run_sweep(c, 3));
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "j0_mhz,nu_d_mhz,delta_d_angstrom,chi,phi_par,residual,solver");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 6);
  CHECK(a.str().find(",static\n") != std::string::npos);
  CHECK(a.str().find(",floquet\n") != std::string::npos);
}

TEST_CASE("sidecar is deterministic") {
  const RunConfig c = default_config();
  const json a = sidecar_json(c, "sweep");
  CHECK(a == sidecar_json(c, "sweep"));
  CHECK(a["constants"]["gamma_mhz_per_mt"].get<double>() == doctest::Approx(28.025).epsilon(1e-4));
  CHECK(a.contains("engine_version"));
}

#ifdef DRP_CLI_PATH
namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli exit codes") {
  CHECK(run_cli("presets") == 0);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("sweep --j0 0:1") == 2);
  CHECK(run_cli("sweep --bogus") == 2);
  CHECK(run_cli("simulate --preset nope") == 2);
  CHECK(run_cli("sweep --config /nonexistent/cfg.json") == 2);
  CHECK(run_cli("sweep --j0 0 --observe chirality") == 2);

  const std::string dir = std::string(DRP_TEST_TMP);
  const std::string out = dir + "/cli_sweep.csv";
  CHECK(run_cli("sweep --j0 0:5:2 --observe chi -o " + out) == 0);
  std::ifstream csv(out);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "j0_mhz,nu_d_mhz,delta_d_angstrom,chi,residual,solver");
  std::ifstream side(out + ".json");
  REQUIRE(side.good());
  const json meta = json::parse(side);
  CHECK(meta["command"] == "sweep");
}
#endif

#ifdef DRP_CONFIG_DIR
#include <filesystem>

TEST_CASE("shipped configs load") {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(DRP_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    const RunConfig c = load_config(e.path().string());
    CHECK_NOTHROW(c.validate());
    CHECK(c.sweep.size() > 0);
    ++n;
  }
  CHECK(n >= 5);
}
#endif
