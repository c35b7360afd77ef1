#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bnem/errors.hpp"
#include "bnem/estimators.hpp"
#include "test_support.hpp"

using namespace bnem;

namespace {

const NetworkStructure ab = test::fixture_ab_structure();

Dataset three_records() {
  Dataset d;
  d.records = {{0, 0}, {0, 1}, {1, 1}};
  return d;
}

SufficientStatistics random_stats(const NetworkStructure& structure,
                                  SplitMix64& rng) {
  SufficientStatistics stats = zero_stats(structure);
  for (Eigen::ArrayXXd& table : stats.counts)
    for (Eigen::Index j = 0; j < table.rows(); ++j)
      for (Eigen::Index k = 0; k < table.cols(); ++k)
        table(j, k) = rng.next_unit() < 0.15 ? 0.0 : 10.0 * rng.next_unit();
  return stats;
}

}  // namespace

TEST_CASE("count_complete on three fixture records") {
  const SufficientStatistics stats = count_complete(ab, three_records());
  CHECK(stats.counts[0](0, 0) == 2.0);
  CHECK(stats.counts[0](0, 1) == 1.0);
  CHECK(stats.counts[1](0, 0) == 1.0);
  CHECK(stats.counts[1](0, 1) == 1.0);
  CHECK(stats.counts[1](1, 0) == 0.0);
  CHECK(stats.counts[1](1, 1) == 1.0);
}

TEST_CASE("count_complete of an empty dataset is zero") {
  const SufficientStatistics stats = count_complete(ab, Dataset{});
  for (const Eigen::ArrayXXd& table : stats.counts)
    CHECK((table == 0.0).all());
}

TEST_CASE("count_complete rejects missing cells naming the record") {
  try {
    (void)count_complete(ab, test::dataset_d4());
    FAIL("expected an incomplete-data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIncompleteData);
    CHECK(e.record() == 1);  // record 2, zero-based 1
    CHECK(std::string(e.what()).find("record 2") != std::string::npos);
  }
}

TEST_CASE("count_complete is permutation invariant") {
  SplitMix64 rng(3);
  Dataset d = three_records();
  d.records.push_back({1, 0});
  Dataset shuffled = d;
  std::reverse(shuffled.records.begin(), shuffled.records.end());
  const SufficientStatistics a = count_complete(ab, d);
  const SufficientStatistics b = count_complete(ab, shuffled);
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    CHECK((a.counts[i] == b.counts[i]).all());
    CHECK(a.counts[i].sum() == static_cast<double>(d.record_count()));
  }
}

TEST_CASE("ml_estimate divides by row totals") {
  const Estimate est = ml_estimate(count_complete(ab, three_records()));
  CHECK(est.params.tables[0](0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(est.params.tables[0](0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(est.params.tables[1](1, 0) == 0.0);
  CHECK(est.params.tables[1](1, 1) == 1.0);
  CHECK(est.uniform_rows.empty());
}

TEST_CASE("ml_estimate sets unsupported rows uniform and flags them") {
  SufficientStatistics stats = zero_stats(ab);
  stats.counts[0] << 2.0, 1.0;  // B stays all-zero
  const Estimate est = ml_estimate(stats);
  CHECK(est.params.tables[1](0, 0) == 0.5);
  CHECK(est.params.tables[1](1, 1) == 0.5);
  CHECK(est.row_flagged(1, 0));
  CHECK(est.row_flagged(1, 1));
  CHECK(!est.row_flagged(0, 0));
}

TEST_CASE("map_estimate with uniform alpha 2") {
  const Estimate est = map_estimate(count_complete(ab, three_records()),
                                    PriorSpec::uniform(ab, 2.0));
  CHECK(est.params.tables[0](0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(est.params.tables[0](0, 1) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("map_estimate with alpha 1 equals ml_estimate exactly") {
  SplitMix64 rng(11);
  const PriorSpec flat = PriorSpec::uniform(ab, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const SufficientStatistics stats = random_stats(ab, rng);
    const Estimate ml = ml_estimate(stats);
    const Estimate map = map_estimate(stats, flat);
    for (std::size_t i = 0; i < ml.params.tables.size(); ++i)
      CHECK((ml.params.tables[i] == map.params.tables[i]).all());
    CHECK(ml.uniform_rows == map.uniform_rows);
  }
}

TEST_CASE("map_estimate rejects alpha below one") {
  CHECK_THROWS_AS(
      (void)map_estimate(zero_stats(ab), PriorSpec::uniform(ab, 0.5)), Error);
}

TEST_CASE("posterior_mean_estimate examples") {
  const PriorSpec flat = PriorSpec::uniform(ab, 1.0);
  const Estimate with_data =
      posterior_mean_estimate(count_complete(ab, three_records()), flat);
  CHECK(with_data.params.tables[0](0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(with_data.params.tables[0](0, 1) == doctest::Approx(0.4).epsilon(1e-15));

  const Estimate no_data = posterior_mean_estimate(zero_stats(ab), flat);
  CHECK(no_data.params.tables[0](0, 0) == 0.5);
  CHECK(no_data.params.tables[1](1, 1) == 0.5);

  SufficientStatistics lopsided = zero_stats(ab);
  lopsided.counts[0] << 0.0, 4.0;
  const Estimate est = posterior_mean_estimate(lopsided, flat);
  CHECK(est.params.tables[0](0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(est.params.tables[0](0, 1) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("posterior_mean_estimate stays strictly positive") {
  SplitMix64 rng(19);
  const PriorSpec flat = PriorSpec::uniform(ab, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Estimate est = posterior_mean_estimate(random_stats(ab, rng), flat);
    for (const Eigen::ArrayXXd& table : est.params.tables)
      CHECK((table > 0.0).all());
  }
}

TEST_CASE("posterior_mean_estimate rejects an empty row with no prior") {
  CHECK_THROWS_AS(
      (void)posterior_mean_estimate(zero_stats(ab), PriorSpec::uniform(ab, 0.0)),
      Error);
}

TEST_CASE("posterior_mean_estimate rejects negative prior entries") {
  PriorSpec prior = PriorSpec::uniform(ab, 1.0);
  prior.alpha[0](0, 1) = -0.5;  // row total still positive
  CHECK_THROWS_AS((void)posterior_mean_estimate(zero_stats(ab), prior), Error);
}

TEST_CASE("estimator rows sum to one") {
  SplitMix64 rng(23);
  const PriorSpec flat = PriorSpec::uniform(ab, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const SufficientStatistics stats = random_stats(ab, rng);
    for (const Estimate& est :
         {ml_estimate(stats), map_estimate(stats, flat),
          posterior_mean_estimate(stats, flat)}) {
      for (const Eigen::ArrayXXd& table : est.params.tables)
        for (Eigen::Index j = 0; j < table.rows(); ++j)
          CHECK(table.row(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}
