#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bioprot/error.hpp"
#include "bioprot/ingest.hpp"
#include "bioprot/pipeline.hpp"
#include "bioprot/security.hpp"

using namespace bioprot;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::budget;
}

const StageStrength& row(const SecurityReport& r, std::string_view stage) {
  for (const auto& s : r.stages) {
    if (s.stage == stage) return s;
  }
  FAIL("missing stage " << stage);
  return r.stages.front();
}

}  // namespace

TEST_CASE("strength arithmetic") {
  CHECK(stage_strength("random_projection", 3772).strength_bits == 3771);
  CHECK(stage_strength("fuzzy_commitment", 11340).strength_bits == 11339);
  CHECK(stage_strength("full", 6800).strength_bits == 6799);
  CHECK(stage_strength("x", 1).strength_bits == 0);
}

TEST_CASE("published rows") {
  const auto kc = published_kc();
  const auto r = strength_report(SystemConfig{}, kc);
  CHECK(row(r, "random_projection").strength_bits == 3771);
  CHECK(row(r, "fuzzy_commitment").strength_bits == 11339);
  CHECK(row(r, "hybrid_full").strength_bits == 6809);
  CHECK(row(r, "full").strength_bits == 6799);
}

TEST_CASE("measured rows and csv") {
  SystemConfig cfg;
  cfg.n = 256;
  cfg.rho = 1;
  const auto r = strength_report(cfg);
  CHECK(row(r, "bda").kc == 256);
  CHECK(row(r, "random_projection").kc == 64 * 64);
  std::ostringstream out;
  write_report_csv(r, out);
  CHECK(out.str().rfind("stage,Kc,strength_bits\n", 0) == 0);
  CHECK(out.str().find("\nbda,256,255\n") != std::string::npos);
  const auto back = parse_report_csv(out.str());
  REQUIRE(back.size() == r.stages.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].stage == r.stages[i].stage);
    CHECK(back[i].kc == r.stages[i].kc);
    CHECK(back[i].strength_bits == r.stages[i].strength_bits);
  }
  const auto again = strength_report(cfg);
  CHECK(again.overall_bits == r.overall_bits);
  CHECK(r.charset.length * std::log2(40.0) >= static_cast<double>(r.overall_bits));
}

TEST_CASE("override parsing") {
  const auto o = parse_kc_overrides("rp=3772, full=6800");
  REQUIRE(o.size() == 2);
  CHECK(o[0].stage == "random_projection");
  CHECK(o[1].kc == 6800);
  const auto r = strength_report(SystemConfig{}, o);
  std::ostringstream out;
  write_report_csv(r, out);
  CHECK(out.str().find("random_projection,3772,3771") != std::string::npos);
  CHECK(out.str().find("full,6800,6799") != std::string::npos);
  CHECK(kind_of([] { parse_kc_overrides("rp"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_kc_overrides("rp=abc"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_kc_overrides("nope=3"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_kc_overrides("rp=0"); }) == ErrorKind::parse);
}

TEST_CASE("acceptance ball") {
  CHECK(acceptance_ball_size(5, 10) == 256);
  CHECK(acceptance_ball_size(1, 8) == 1);
  CHECK(acceptance_ball_size(3, 12) == 256);
  for (auto [rho, n] : {std::pair{1, 12}, {3, 12}, {5, 15}, {5, 10}, {7, 14}, {3, 15}}) {
    const auto t = make_brute_force_target(static_cast<std::uint32_t>(n), static_cast<std::uint16_t>(rho), 17);
    CHECK(exhaustive_acceptance_count(t.commitment) ==
          acceptance_ball_size(static_cast<std::uint16_t>(rho), static_cast<std::uint32_t>(n)));
  }
}

TEST_CASE("brute force simulation") {
  const auto none = brute_force_sim(8, 1, 100000, 3);
  CHECK(none.theoretical_rate == doctest::Approx(1.0 / 256));
  CHECK(none.consistent);
  const auto quarter = brute_force_sim(10, 5, 20000, 4);
  CHECK(quarter.theoretical_rate == doctest::Approx(0.25));
  CHECK(quarter.consistent);
  CHECK(brute_force_sim(10, 5, 2000, 4, 1).successes == brute_force_sim(10, 5, 2000, 4, 2).successes);
  CHECK(kind_of([] { brute_force_sim(10, 5, 0, 1); }) == ErrorKind::domain);
  CHECK(kind_of([] { brute_force_sim(25, 5, 10, 1); }) == ErrorKind::budget);
}

TEST_CASE("attacks on a stolen record") {
  SystemConfig cfg;
  cfg.l = 64;
  cfg.l_r = 16;
  cfg.n = 60;
  const Dataset ds = generate_synthetic({1, 4, 64, 0.1, 1.0, 9});
  const auto rec = enroll("victim", ds.classes[0].samples, cfg, 77);
  const auto bytes = serialize_record(rec);

  const auto helper_only = affine_attack_sim(bytes, OracleAccess::none, 1000, 1);
  CHECK(helper_only.successes == 0);
  const auto model = affine_attack_sim(bytes, OracleAccess::model, 300, 2);
  CHECK(model.successes == 0);
  CHECK(model.consistent);

  const auto leaked = leaked_template_attack(bytes, binary_template(ds.classes[0].samples[0], rec));
  CHECK(leaked.successes == 1);
}

TEST_CASE("model oracle matches brute force at small n") {
  // n = 10, rho = 5: both attacks should accept about a quarter of the time.
  SystemConfig cfg;
  cfg.l = 32;
  cfg.l_r = 16;
  cfg.n = 10;
  cfg.d_min = 2;
  const Dataset ds = generate_synthetic({1, 4, 32, 0.1, 1.0, 3});
  const auto rec = enroll("v", ds.classes[0].samples, cfg, 5);
  const auto model = affine_attack_sim(serialize_record(rec), OracleAccess::model, 2000, 6);
  const auto brute = brute_force_sim(10, 5, 2000, 6);
  CHECK(model.theoretical_rate == doctest::Approx(brute.theoretical_rate));
  CHECK(model.consistent);
  CHECK(brute.consistent);
}
