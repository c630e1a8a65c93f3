#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nonpure_cli/report.hpp"
#include "nonpure_cli/runner.hpp"
#include "nonpure_cli/scenario.hpp"

namespace nonpure::cli {
namespace {

const std::string kData = NONPURE_TEST_DATA;

const Row* find_row(const Report& r, const std::string& check) {
  for (const Row& row : r.rows) {
    if (row.check == check) return &row;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Scenario parsing

TEST(Scenario, ParsesKeysCommentsAndLists) {
  const Scenario s = Scenario::parse(
      "# header\nversion = 1\nkind = evolve\n\nbox.lo = -1, -2  # trailing\nh = 0.25\n"
      "levels = 2\n");
  EXPECT_EQ(s.kind(), Kind::kEvolve);
  EXPECT_EQ(s.levels(), 2);
  EXPECT_EQ(s.numbers("box.lo", {}), (std::vector<double>{-1.0, -2.0}));
  EXPECT_EQ(s.positive("h", 1.0), 0.25);
  EXPECT_EQ(s.number("t_end", 3.0), 3.0);
}

TEST(Scenario, RejectsMalformedInput) {
  auto throws_with = [](const std::string& text, const std::string& needle) {
    try {
      Scenario::parse(text);
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
      return;
    }
    ADD_FAILURE() << "no ParseError for: " << text;
  };
  throws_with("version = 1\nkind = validate\nbad key = 1\n", "line 3: malformed key 'bad key'");
  throws_with("version = 1\nkind = validate\nh 0.1\n", "line 3");
  throws_with("version = 1\nkind = validate\nh = 1\nh = 2\n", "duplicate key 'h'");
  throws_with("kind = validate\n", "version");
  throws_with("version = 2\nkind = validate\n", "version");
  throws_with("version = 1\n", "kind");
  throws_with("version = 1\nkind = dance\n", "dance");
  throws_with("version = 1\nkind = validate\nlevels = 5\n", "levels");
}

TEST(Scenario, TypedAccessorsNameTheKey) {
  const Scenario s =
      Scenario::parse("version = 1\nkind = validate\nh = -1\nfixture = cube\ncount = 2.5\n");
  EXPECT_THROW(s.positive("h", 1.0), ParseError);
  EXPECT_THROW(s.choice("fixture", "affine", {"affine", "surface"}), ParseError);
  EXPECT_THROW(s.integer("count", 1, 1, 10), ParseError);
  EXPECT_THROW(s.seed(), ParseError);
  EXPECT_THROW(s.allow_only({"h", "fixture"}), ParseError);
  try {
    s.positive("h", 1.0);
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'h'"), std::string::npos) << e.what();
  }
}

TEST(Scenario, HashDependsOnText) {
  const Scenario a = Scenario::parse("version = 1\nkind = validate\n");
  const Scenario b = Scenario::parse("version = 1\nkind = validate\n");
  const Scenario c = Scenario::parse("version = 1\nkind = validate\nh = 0.05\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Scenario, LevelOverrideIsRangeChecked) {
  Scenario s = Scenario::parse("version = 1\nkind = validate\n");
  s.set_levels(4);
  EXPECT_EQ(s.levels(), 4);
  EXPECT_THROW(s.set_levels(0), ParseError);
  EXPECT_THROW(s.set_levels(5), ParseError);
}

// ---------------------------------------------------------------------------
// Reports

TEST(Report, JudgeAppliesToleranceOrderAndFloor) {
  Row r;
  r.residual = 0.1;
  r.tol = 0.2;
  r.min_order = 1.9;
  r.order = 2.0;
  judge(r);
  EXPECT_TRUE(r.pass);
  r.order = 1.5;
  judge(r);
  EXPECT_FALSE(r.pass);
  r.order.reset();
  r.at_floor = true;
  judge(r);
  EXPECT_TRUE(r.pass);
  r.residual = NAN;
  judge(r);
  EXPECT_FALSE(r.pass);
}

TEST(Report, OverallPassIsConjunction) {
  Report rep;
  rep.rows.resize(2);
  EXPECT_TRUE(rep.pass());
  rep.rows[1].pass = false;
  EXPECT_FALSE(rep.pass());
}

TEST(Report, JsonRecordsCarryRequiredFields) {
  Report rep;
  rep.command = "validate";
  Row r;
  r.check = "continuity";
  r.residual = 0.25;
  r.tol = 0.5;
  judge(r);
  rep.rows.push_back(r);
  const std::string json = to_jsonl(rep);
  EXPECT_NE(json.find(R"({"check":"continuity","residual":0.25,"tol":0.5,"order":null,"pass":true})"),
            std::string::npos)
      << json;
  EXPECT_NE(json.find(R"("summary":"validate")"), std::string::npos);
  EXPECT_NE(to_text(rep).find("overall PASS"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Running scenarios

TEST(Runner, AffineValidatePassesAtDefaultResolution) {
  const RunOutput out = run_scenario(Scenario::load(kData + "/golden_pass.scn"));
  EXPECT_TRUE(out.report.pass());
  const Row* c = find_row(out.report, "continuity");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->pass);
  EXPECT_FALSE(c->order.has_value());
  EXPECT_EQ(find_row(out.report, "compatibility")->residual, 0.0);
}

TEST(Runner, OrderFitPresentFromThreeLevels) {
  Scenario s = Scenario::load(kData + "/golden_pass.scn");
  s.set_levels(2);
  EXPECT_FALSE(find_row(run_scenario(s).report, "continuity")->order.has_value());
  s.set_levels(3);
  const Row* c = find_row(run_scenario(s).report, "continuity");
  ASSERT_TRUE(c->order.has_value());
  EXPECT_GE(*c->order, 1.9);
}

TEST(Runner, ExactZeroResidualIsReportedAtFloor) {
  // Translation families are flat, so the mixed residual is rounding noise.
  Scenario s = Scenario::parse("version = 1\nkind = validate\nfixture = planar-translation\n"
                               "levels = 3\n");
  const RunOutput out = run_scenario(s);
  const Row* m = find_row(out.report, "mixed-partials");
  ASSERT_NE(m, nullptr);
  EXPECT_TRUE(m->at_floor);
  EXPECT_TRUE(m->pass);
  EXPECT_NE(to_jsonl(out.report).find(R"("at_floor":true)"), std::string::npos);
}

TEST(Runner, ZeroToleranceFailsAndShowsResiduals) {
  const RunOutput out = run_scenario(Scenario::load(kData + "/golden_residual_fail.scn"));
  EXPECT_FALSE(out.report.pass());
  const Row* c = find_row(out.report, "continuity");
  EXPECT_GT(c->residual, 0.0);
  EXPECT_FALSE(c->pass);
}

TEST(Runner, StreamFixtureBreaksCompatibilityOnly) {
  const RunOutput out = run_scenario(
      Scenario::parse("version = 1\nkind = validate\nfixture = planar-stream\nlevels = 3\n"));
  const Row* c = find_row(out.report, "compatibility-broken");
  ASSERT_NE(c, nullptr);
  EXPECT_GT(c->residual, *c->tol);
  EXPECT_GE(*find_row(out.report, "mixed-partials")->order, 1.9);
  EXPECT_TRUE(out.report.pass());
}

TEST(Runner, MetricReportsDistance) {
  const RunOutput out = run_scenario(Scenario::load(kData + "/metric_translate.scn"));
  EXPECT_TRUE(out.report.pass());
  EXPECT_EQ(out.stdout_extra.rfind("distance 0.5", 0), 0u) << out.stdout_extra;
}

TEST(Runner, ConstructorErrorsAreDistinct) {
  EXPECT_THROW(run_scenario(Scenario::load(kData + "/golden_constructor_fail.scn")),
               ConstructorError);
  EXPECT_THROW(run_scenario(Scenario::parse("version = 1\nkind = nc-stokes\nn = 3\n")),
               ConstructorError);
}

TEST(Runner, RandomFixturesRequireSeed) {
  EXPECT_THROW(run_scenario(Scenario::parse("version = 1\nkind = identity-suite\n")), ParseError);
  EXPECT_THROW(
      run_scenario(Scenario::parse("version = 1\nkind = nc-stokes\ngenerators = random\n")),
      ParseError);
}

TEST(Runner, SeededReportsAreByteIdentical) {
  const Scenario s = Scenario::load(kData + "/identity_seeded.scn");
  EXPECT_EQ(to_jsonl(run_scenario(s).report), to_jsonl(run_scenario(s).report));
  const Scenario r = Scenario::parse(
      "version = 1\nkind = nc-stokes\nn = 3\ngenerators = random\nseed = 5\nlevels = 2\n");
  EXPECT_EQ(to_jsonl(run_scenario(r).report), to_jsonl(run_scenario(r).report));
}

TEST(Runner, CommandMapsOutcomesToExitCodes) {
  std::ostringstream out, err;
  auto run = [&](Kind kind, const std::string& file) {
    CommandOptions o;
    o.command = kind;
    o.scenario_path = kData + "/" + file;
    return run_command(o, out, err);
  };
  EXPECT_EQ(run(Kind::kValidate, "golden_pass.scn"), kExitPass);
  EXPECT_EQ(run(Kind::kValidate, "golden_residual_fail.scn"), kExitCheckFail);
  EXPECT_EQ(run(Kind::kValidate, "golden_parse_fail.scn"), kExitParse);
  EXPECT_NE(err.str().find("tol continuity"), std::string::npos);
  EXPECT_EQ(run(Kind::kEvolve, "golden_constructor_fail.scn"), kExitConstructor);
  EXPECT_EQ(run(Kind::kStokes, "golden_pass.scn"), kExitParse);
  EXPECT_EQ(run(Kind::kValidate, "missing.scn"), kExitParse);
}

}  // namespace
}  // namespace nonpure::cli
