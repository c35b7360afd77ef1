#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "bnem/dataio.hpp"
#include "bnem/errors.hpp"
#include "bnem/oracle.hpp"
#include "test_support.hpp"

using namespace bnem;

namespace {

const NetworkStructure ab = test::fixture_ab_structure();
const ParameterSet ab_params = test::fixture_ab_params();

}  // namespace

TEST_CASE("brute_marginal on the fixture") {
  const MarginalResult result = brute_marginal(ab, ab_params, {kMissing, 1}, {0});
  CHECK(result.p_evidence == doctest::Approx(0.62).epsilon(1e-12));
  CHECK(result.table(0) == doctest::Approx(0.3 / 0.62).epsilon(1e-12));
  CHECK(result.table(1) == doctest::Approx(0.32 / 0.62).epsilon(1e-12));
}

TEST_CASE("brute_marginal over all targets is the full joint") {
  const MarginalResult result =
      brute_marginal(ab, ab_params, {kMissing, kMissing}, {0, 1});
  CHECK(result.p_evidence == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.table.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.table(0) == doctest::Approx(0.30).epsilon(1e-12));  // (a0,b0)
}

TEST_CASE("brute_marginal flags impossible evidence") {
  ParameterSet deterministic;
  Eigen::ArrayXXd a(1, 2), b(2, 2);
  a << 1.0, 0.0;
  b << 1.0, 0.0, 0.0, 1.0;
  deterministic.tables = {a, b};
  CHECK_THROWS_AS(
      (void)brute_marginal(ab, deterministic, {kMissing, 1}, {0}), Error);
}

TEST_CASE("brute_marginal refuses oversized state spaces") {
  SplitMix64 rng(1);
  const NetworkStructure s = test::random_structure(rng, 25, 2);  // 2^25 states
  const ParameterSet params = test::random_params(s, 1);
  const Evidence none(s.node_count(), kMissing);
  CHECK_THROWS_AS((void)brute_marginal(s, params, none, {0}), Error);
}

TEST_CASE("enumerate_completions yields each completion exactly once") {
  CompletionEnumerator completions(test::dataset_d4(), ab);
  CHECK(completions.completion_count() == 4);

  std::set<std::vector<std::vector<int>>> seen;
  Dataset out;
  while (completions.next(out)) {
    for (const std::vector<int>& record : out.records)
      for (int cell : record) CHECK(cell != kMissing);
    seen.insert(out.records);
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("a complete dataset has exactly one completion: itself") {
  Dataset complete;
  complete.records = {{0, 1}, {1, 0}};
  CompletionEnumerator completions(complete, ab);
  CHECK(completions.completion_count() == 1);
  Dataset out;
  REQUIRE(completions.next(out));
  CHECK(out.records == complete.records);
  CHECK(!completions.next(out));
}

TEST_CASE("17 binary missing cells exceed the default cap") {
  Dataset big;
  for (int l = 0; l < 9; ++l) big.records.push_back({kMissing, kMissing});
  big.records.back()[1] = 0;  // 17 missing cells
  try {
    CompletionEnumerator completions(big, ab);
    FAIL("expected a capacity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kCapacity);
    CHECK(std::string(e.what()).find("131072") != std::string::npos);
  }
}

TEST_CASE("completions stream in lexicographic order of missing cells") {
  Dataset d;
  d.records = {{kMissing, 0}, {0, kMissing}};
  CompletionEnumerator completions(d, ab);
  std::vector<std::pair<int, int>> order;
  Dataset out;
  while (completions.next(out))
    order.emplace_back(out.records[0][0], out.records[1][1]);
  const std::vector<std::pair<int, int>> expected = {
      {0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(order == expected);
}

TEST_CASE("sandwich_report on D4") {
  const SandwichReport report =
      sandwich_report(ab, test::dataset_d4(), PriorSpec::uniform(ab, 1.0));
  CHECK(report.completion_count == 4);
  CHECK(report.completion_min[1](0, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(report.completion_max[1](0, 0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(report.conforms);
  CHECK(report.tight);
}

TEST_CASE("sandwich_report on complete data has zero-width intervals") {
  Dataset complete;
  complete.records = {{0, 0}, {1, 1}, {0, 1}};
  const SandwichReport report =
      sandwich_report(ab, complete, PriorSpec::uniform(ab, 1.0));
  CHECK(report.conforms);
  CHECK(report.tight);
  for (int i = 0; i < ab.node_count(); ++i)
    CHECK((report.bound_min[i] == report.bound_max[i]).all());
}

TEST_CASE("sandwich_report on a single fully missing record") {
  Dataset d;
  d.records = {{kMissing, kMissing}};
  const SandwichReport report =
      sandwich_report(ab, d, PriorSpec::uniform(ab, 1.0));
  CHECK(report.completion_min[1](0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(report.completion_max[1](0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(report.tight);
}

TEST_CASE("compare_runs with zero trials is empty") {
  CompareConfig config;
  config.trials = 0;
  CHECK(compare_runs(ab, ab_params, config).empty());
}

TEST_CASE("compare_runs with no masking converges in two iterations") {
  CompareConfig config;
  config.record_count = 60;
  config.mask_rate = 0.0;
  config.trials = 3;
  config.seed = 5;
  const std::vector<TrialSummary> summary = compare_runs(ab, ab_params, config);
  REQUIRE(summary.size() == 3);
  for (const TrialSummary& row : summary) {
    CHECK(row.em_iters == 2);
    CHECK(row.them_iters == 2);
  }
}

TEST_CASE("compare_runs is deterministic and threshold-EM stays positive") {
  CompareConfig config;
  config.record_count = 80;
  config.mask_rate = 0.37;
  config.trials = 5;
  config.seed = 11;
  const std::vector<TrialSummary> a = compare_runs(ab, ab_params, config);
  const std::vector<TrialSummary> b = compare_runs(ab, ab_params, config);
  CHECK(serialize_summary(a) == serialize_summary(b));
  for (const TrialSummary& row : a) CHECK(row.them_zero_params == 0);
}

TEST_CASE("serialize_summary emits the documented header") {
  const std::string text = serialize_summary({});
  CHECK(text ==
        "trial,em_iters,them_iters,em_final_ll,them_final_ll,em_zero_params,"
        "them_zero_params,them_violations\n");
}
