#include "doctest.h"

#include "ntkx/errors.hpp"
#include "ntkx/runner.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace ntkx;

namespace {

ScenarioConfig small_theorem1() {
  return parse_config(R"({
    "id": "t1", "seed": 5, "d": 2, "n": 6,
    "t_list": [100, 1000, 10000],
    "target": {"kind": "sinusoidal", "u": [1.3, -0.7], "phase": 0.3},
    "directions": {"random": 8, "include_shift": true, "include_orthogonal": true}
  })");
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ScenarioConfig c = parse_config("{}");
  CHECK(c.d == 2);
  CHECK(c.n == 8);
  CHECK(c.t_list == std::vector<double>{1e2, 1e3, 1e4});
  CHECK(c.delta.values == std::vector<double>{1e-8});
  CHECK(c.delta.mode == TikhonovConfig::Mode::RelativeToMeanDiagonal);
  CHECK_FALSE(c.kernel.monte_carlo);
  CHECK(c.profile.points == 41);

  const ScenarioConfig t = small_theorem1();
  const ScenarioConfig back = parse_config(dump_config(t));
  CHECK(dump_config(back) == dump_config(t));
  CHECK(back.seed == 5);
  CHECK(back.target.u == std::vector<double>{1.3, -0.7});
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config(R"({"sede": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"profile": {"radus": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"d": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"t_list": "x"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"delta": {"values": [-1]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s : {0u, 1u, 2u})
    for (const char* p : {"realization", "shift", "features"})
      for (std::uint64_t i : {0u, 1u, 2u}) seen.insert(derive_seed(s, p, i));
  CHECK(seen.size() == 27);
}

TEST_CASE("scenario factories") {
  ScenarioConfig c = small_theorem1();
  const Realization phi = make_realization(c);
  CHECK(phi.size() == 6);
  for (const auto& p : phi.points())
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p[i]) <= 1.0);
  CHECK(make_realization(c).points() == phi.points());

  const Direction v = make_shift_direction(c);
  CHECK(v.norm() == doctest::Approx(1.0));
  const auto dirs = make_eval_directions(c, v);
  REQUIRE(dirs.size() == 10);
  CHECK(dirs[8].id == "shift");
  CHECK(dirs[9].orthogonal);
  CHECK(std::abs(dirs[9].direction.coords().dot(v.coords())) < 1e-12);
  for (const auto& d : dirs) CHECK(d.direction.norm() == doctest::Approx(1.0));

  c.realization.kind = RealizationSpec::Kind::Explicit;
  c.realization.points = {{0.1, 0.2}};
  c.n = 1;
  CHECK(make_realization(c)[0] == Point{0.1, 0.2});
}

TEST_CASE("csv formatting") {
  CHECK(format_cell(Cell{}) == "");
  CHECK(format_cell(Cell{0.1}) == "0.10000000000000001");
  CHECK(format_cell(Cell{std::int64_t{42}}) == "42");
  CHECK(format_cell(Cell{NAN}) == "nan");
  CHECK(format_cell(Cell{INFINITY}) == "inf");
  CHECK(format_cell(Cell{-INFINITY}) == "-inf");

  Report r{"demo", {}};
  ReportRow a;
  a.scenario = "s";
  a.check = "x";
  a.set("value", 1.5).set("note", std::string("a,b"));
  ReportRow b;
  b.scenario = "s";
  b.check = "y";
  b.status = "skipped";
  b.set("extra", std::int64_t{3});
  r.rows = {a, b};
  CHECK(r.columns() == std::vector<std::string>{"scenario", "check", "status", "value", "note", "extra"});
  CHECK(to_csv(r) == "scenario,check,status,value,note,extra\ns,x,ok,1.5,\"a,b\",\ns,y,skipped,,,3\n");
  CHECK(r.all_ok());
  CHECK(r.select("y").size() == 1);
  CHECK(std::isnan(a.number("missing")));
  CHECK(a.text("note") == "a,b");
}

TEST_CASE("theorem1 report shape") {
  const Report r = run_theorem1(small_theorem1());
  // 3 t values × 1 δ × 10 directions, then one summary.
  CHECK(r.select("profile").size() == 30);
  CHECK(r.select("summary").size() == 1);
  CHECK(r.all_ok());
  for (const auto* row : r.select("profile")) {
    CHECK(std::isfinite(row->number("c2")));
    CHECK(row->number("wall_time") == 0.0);
  }
  CHECK(to_csv(r) == to_csv(run_theorem1(small_theorem1())));
}

TEST_CASE("inverse-check report") {
  ScenarioConfig c = parse_config(R"({"inverse": {"n": [1, 4], "kappa": [0, 1], "t": [10], "delta": [1e-3]}})");
  const Report r = run_inverse_check(c);
  const auto cells = r.select("cell");
  REQUIRE(cells.size() == 4);
  int skipped = 0;
  for (const auto* row : cells) {
    if (row->status == "skipped") {
      ++skipped;
      CHECK(row->number("kappa") == 0.0);
    } else {
      CHECK(row->number("identity_residual") < 1e-8);
      CHECK(row->number("alpha_rel_diff") < 1e-8);
    }
  }
  CHECK(skipped == 2);
  CHECK(r.all_ok());
}

TEST_CASE("pascal report is all ok") {
  ScenarioConfig c = parse_config(R"({"d": 3, "pascal": {"max_order": 8, "instances": 10}})");
  const Report r = run_pascal(c);
  CHECK(r.select("shift").size() == 8);
  CHECK(r.select("sigma").size() == 10);
  CHECK(r.all_ok());
}

TEST_CASE("subcommand dispatch") {
  const auto names = subcommand_names();
  CHECK(names.size() == 10);
  CHECK_THROWS_AS(run_subcommand("nope", ScenarioConfig{}), ConfigError);
  ScenarioConfig c = parse_config(R"({"pascal": {"max_order": 2, "instances": 1, "max_derivative_order": 1}})");
  CHECK(run_subcommand("pascal", c).subcommand == "pascal");
}

TEST_CASE("far-field windows look linear") {
  ScenarioConfig c = parse_config(R"({
    "seed": 3, "target": {"kind": "linear", "u": [0.8, -0.5], "phase": 0.2},
    "directions": {"random": 8, "include_shift": false, "include_orthogonal": false}
  })");
  const Report r = run_farfield(c);
  CHECK(r.select("window").size() == 16);
  for (const auto* s : r.select("summary")) CHECK(s->number("passing") >= 7);
}
