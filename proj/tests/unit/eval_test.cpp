#include <doctest.h>

#include <sstream>

#include "bioprot/error.hpp"
#include "bioprot/eval.hpp"

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

SystemConfig small_config() {
  SystemConfig c;
  c.l = 64;
  c.l_r = 16;
  c.n = 16;
  c.rho = 1;
  c.mode = TrainingMode::multi_class;
  return c;
}

}  // namespace

TEST_CASE("dataset sources") {
  const auto s = parse_dataset_source("syn=synthetic:k=4,r=3,l=64,sigma_within=0.2,seed=9");
  CHECK(s.kind == DatasetSource::Kind::synthetic);
  CHECK(s.name == "syn");
  CHECK(s.synthetic.classes == 4);
  CHECK(s.synthetic.samples_per_class == 3);
  CHECK(s.synthetic.sigma_within == doctest::Approx(0.2));
  CHECK(s.synthetic.seed == 9);

  const auto c = parse_dataset_source("csv:/tmp/feat.csv");
  CHECK(c.kind == DatasetSource::Kind::csv);
  CHECK(c.name == "feat");

  const auto i = parse_dataset_source("faces=images:/data/faces:32x24");
  CHECK(i.kind == DatasetSource::Kind::images);
  CHECK(i.path == "/data/faces");
  CHECK(i.width == 32);
  CHECK(i.height == 24);

  CHECK(kind_of([] { parse_dataset_source("tape:x"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_dataset_source("synthetic:q=1"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_dataset_source("images:/x:32"); }) == ErrorKind::parse);
}

TEST_CASE("run config files") {
  const auto rc = parse_run_config(
      "# demo\nn = 64\nrho=1\nmode = multi_class\nseed = 12\ndataset = a=synthetic:k=3\neval_mode = true\n", "cfg");
  CHECK(rc.system.n == 64);
  CHECK(rc.system.rho == 1);
  CHECK(rc.system.mode == TrainingMode::multi_class);
  CHECK(rc.seed == std::uint64_t{12});
  CHECK(rc.eval_mode);
  REQUIRE(rc.datasets.size() == 1);
  CHECK(rc.datasets[0].synthetic.classes == 3);

  try {
    parse_run_config("n = 64\nbogus = 1\n", "cfg");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(kind_of([] { parse_run_config("n\n", "cfg"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_run_config("n = x\n", "cfg"); }) == ErrorKind::parse);
}

TEST_CASE("evaluation report") {
  const Dataset ds = generate_synthetic({4, 4, 64, 0.1, 1.0, 5});
  const auto report = run_eval(ds, {small_config(), 3, 0, 1});
  REQUIRE(report.stages.size() == 4);
  CHECK(report.stages[0].stage == "feature_vector");
  CHECK(report.stages[3].stage == "full");
  CHECK(report.stage("feature_vector").genuine_count == 16);
  CHECK(report.stage("feature_vector").impostor_count == 48);
  CHECK(report.stage("full").impostor_count == 48);
  CHECK(report.genuine_trials == 16);
  for (const auto& s : report.stages) CHECK(s.genuine_mean > s.impostor_mean);
  CHECK(report.binarizer("bda").count() == report.stage("binary").count());
  CHECK(report.binarizers.size() == 2);

  std::ostringstream csv;
  write_stage_csv(report, csv);
  CHECK(csv.str().rfind("stage,genuine_mean,impostor_mean,count\n", 0) == 0);
  const auto rows = parse_stage_csv(csv.str());
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rows[i].stage == report.stages[i].stage);
    CHECK(rows[i].genuine_mean == report.stages[i].genuine_mean);
    CHECK(rows[i].impostor_mean == report.stages[i].impostor_mean);
    CHECK(rows[i].count == report.stages[i].count());
  }

  std::ostringstream bins;
  write_binarizer_csv(report, bins);
  CHECK(bins.str().rfind("binarizer,genuine_mean,impostor_mean,margin,count\n", 0) == 0);

  // Deterministic given seeds.
  std::ostringstream again;
  write_stage_csv(run_eval(ds, {small_config(), 3, 0, 2}), again);
  CHECK(again.str() == csv.str());
}

TEST_CASE("identical samples give perfect genuine binary scores") {
  const Dataset ds = generate_synthetic({3, 3, 64, 0.0, 1.0, 2});
  auto cfg = small_config();
  const auto report = run_eval(ds, {cfg, 1, 0, 1});
  CHECK(report.stage("binary").genuine_mean == doctest::Approx(static_cast<double>(cfg.n)));
  cfg.mode = TrainingMode::per_user;
  CHECK(run_eval(ds, {cfg, 1, 0, 1}).stage("binary").genuine_mean == doctest::Approx(static_cast<double>(cfg.n)));
}

TEST_CASE("evaluation preconditions") {
  CHECK(kind_of([] { run_eval(generate_synthetic({1, 4, 64, 0.1, 1.0, 1}), {small_config(), 1, 0, 1}); }) ==
        ErrorKind::structural);
  CHECK(kind_of([] { run_eval(generate_synthetic({3, 2, 64, 0.1, 1.0, 1}), {small_config(), 1, 0, 1}); }) ==
        ErrorKind::structural);
  CHECK(kind_of([] { run_eval(generate_synthetic({3, 3, 32, 0.1, 1.0, 1}), {small_config(), 1, 0, 1}); }) ==
        ErrorKind::dimension);
}

TEST_CASE("timing report") {
  const Dataset ds = generate_synthetic({3, 3, 64, 0.1, 1.0, 5});
  const auto row = run_bench(ds, "syn", {small_config(), 1, 3, 1});
  CHECK(row.dataset == "syn");
  CHECK(row.count == 9);
  CHECK(row.mean_ms > 0.0);
  CHECK(row.stddev_ms >= 0.0);
  CHECK(kind_of([&] { run_bench(ds, "syn", {small_config(), 1, 2, 1}); }) == ErrorKind::domain);

  std::ostringstream csv;
  write_timing_csv({row, run_bench(ds, "two", {small_config(), 1, 3, 1})}, csv);
  CHECK(csv.str().rfind("dataset,mean_ms,stddev_ms,count\n", 0) == 0);
  const auto back = parse_timing_csv(csv.str());
  REQUIRE(back.size() == 2);
  CHECK(back[0].dataset == "syn");
  CHECK(back[0].mean_ms == row.mean_ms);
  CHECK(back[1].count == 9);
}
