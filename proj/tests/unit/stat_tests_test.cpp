#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "asl/errors.hpp"
#include "asl/stat_tests.hpp"
#include "synthetic.hpp"

namespace asl {
namespace {

using test_support::thrown_kind;

// Reference p-values and tau computed once with an external statistics
// package and frozen here.
constexpr double kPairedP = 0.0006250418029416883;
constexpr double kTwoSampleP = 0.0033821171466586436;
constexpr double kPairedP2 = 0.04717895979927314;
constexpr double kTwoSampleP2 = 0.2071449899038779;

const std::vector<double> kA{0.9, 0.8, 0.7, 0.6};
const std::vector<double> kB{0.5, 0.4, 0.35, 0.3};
const std::vector<double> kA2{3.1, 2.0, 4.5, 3.3, 2.9, 5.0, 4.1};
const std::vector<double> kB2{2.0, 2.5, 3.0, 3.1, 1.5, 4.0, 3.9};

TEST(TTest, FrozenReferenceValues) {
  EXPECT_NEAR(paired_t_test(kA, kB), kPairedP, 1e-12);
  EXPECT_NEAR(two_sample_t_test(kA, kB), kTwoSampleP, 1e-12);
  EXPECT_NEAR(paired_t_test(kA2, kB2), kPairedP2, 1e-12);
  EXPECT_NEAR(two_sample_t_test(kA2, kB2), kTwoSampleP2, 1e-12);
}

TEST(TTest, IdenticalInputsGiveOne) {
  EXPECT_DOUBLE_EQ(paired_t_test(kA, kA), 1.0);
}

TEST(TTest, ConstantShiftGivesZero) {
  std::vector<double> b(10), a(10);
  for (int i = 0; i < 10; ++i) {
    b[i] = i;
    a[i] = i + 1.0;
  }
  EXPECT_LT(paired_t_test(a, b), 1e-12);
}

TEST(TTest, PairingErrors) {
  std::vector<double> shorter{0.1, 0.2, 0.3};
  EXPECT_EQ(thrown_kind([&] { paired_t_test(kA, shorter); }), ErrorKind::kPairing);
  std::map<std::string, double> a{{"q1", 1}, {"q2", 2}};
  std::map<std::string, double> b{{"q1", 1}, {"q3", 2}};
  EXPECT_EQ(thrown_kind([&] { paired_t_test(a, b); }), ErrorKind::kPairing);
}

TEST(TTest, PValuesInUnitRangeAndScaleWithEffect) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(12), b(12), a2(12);
    for (int i = 0; i < 12; ++i) {
      b[i] = noise(rng);
      a[i] = b[i] + 0.3 + 0.5 * noise(rng);
      a2[i] = b[i] + 2.0 * (a[i] - b[i]);
    }
    const double p = paired_t_test(a, b);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_NEAR(paired_t_test(a2, b), p, 1e-9);
    std::vector<double> shifted(12);
    for (int i = 0; i < 12; ++i) shifted[i] = a[i] + 1.0;
    EXPECT_LE(paired_t_test(shifted, b), p + 1e-12);
  }
}

MetricSeries series(Orientation o, double aggregate, std::vector<double> per_query) {
  MetricSeries s;
  s.orientation = o;
  s.aggregate = aggregate;
  for (std::size_t i = 0; i < per_query.size(); ++i)
    s.per_query["q" + std::to_string(i)] = per_query[i];
  return s;
}

TEST(Significance, GainGate) {
  SignificanceConfig cfg;
  EXPECT_TRUE(passes_significance(0.55, 0.50, 0.01, Orientation::kHigherBetter, cfg));
  EXPECT_FALSE(passes_significance(0.52, 0.50, 0.001, Orientation::kHigherBetter, cfg));
  EXPECT_TRUE(passes_significance(27, 39, 0.01, Orientation::kLowerBetter, cfg));
  EXPECT_FALSE(passes_significance(39, 27, 0.01, Orientation::kLowerBetter, cfg));
  EXPECT_FALSE(passes_significance(0.6, 0.5, 0.06, Orientation::kHigherBetter, cfg));
  EXPECT_EQ(thrown_kind([] { relative_improvement(0.5, 0.0, Orientation::kHigherBetter); }),
            ErrorKind::kUndefinedImprovement);
}

TEST(Significance, IrreflexiveAndOneDirectional) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  SignificanceConfig cfg;
  for (int t = 0; t < 300; ++t) {
    std::vector<double> a(8), b(8);
    double sa = 0, sb = 0;
    for (int i = 0; i < 8; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      sa += a[i];
      sb += b[i];
    }
    for (auto o : {Orientation::kHigherBetter, Orientation::kLowerBetter}) {
      auto A = series(o, sa / 8, a);
      auto B = series(o, sb / 8, b);
      EXPECT_FALSE(significantly_better(A, A, cfg));
      EXPECT_FALSE(significantly_better(A, B, cfg) && significantly_better(B, A, cfg));
    }
  }
}

TEST(Significance, ConfigValidation) {
  SignificanceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_p_value = 1.5;
  EXPECT_EQ(thrown_kind([&] { cfg.validate(); }), ErrorKind::kInvalidArgument);
}

TEST(DeltaSort, FourSystemExample) {
  // Under A all four systems tie; under B systems 0 and 1 beat system 3.
  SignificanceConfig cfg;
  const auto H = Orientation::kHigherBetter;
  std::vector<std::string> ids{"a", "b", "c", "d"};
  std::vector<MetricSeries> old_m{series(H, 0.5, {0.5, 0.5, 0.5}), series(H, 0.5, {0.5, 0.5, 0.5}),
                                  series(H, 0.5, {0.5, 0.5, 0.5}), series(H, 0.5, {0.5, 0.5, 0.5})};
  std::vector<MetricSeries> new_m{series(H, 0.8, {0.8, 0.8, 0.8}), series(H, 0.8, {0.8, 0.8, 0.8}),
                                  series(H, 0.5, {0.5, 0.5, 0.5}), series(H, 0.5, {0.5, 0.5, 0.5})};
  // c and d each gain two better competitors.
  DeltaSortResult r = delta_sort(ids, old_m, new_m, cfg);
  ASSERT_EQ(r.systems.size(), 4u);
  EXPECT_EQ(r.systems[3].n0, 0u);
  EXPECT_EQ(r.systems[3].n1, 2u);
  EXPECT_DOUBLE_EQ(r.systems[3].delta_sort, 50.0);
  EXPECT_DOUBLE_EQ(r.max_delta_sort, 50.0);

  DeltaSortResult same = delta_sort(ids, new_m, new_m, cfg);
  EXPECT_DOUBLE_EQ(same.max_delta_sort, 0.0);
  DeltaSortResult swapped = delta_sort(ids, new_m, old_m, cfg);
  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_DOUBLE_EQ(swapped.systems[i].delta_sort, r.systems[i].delta_sort);
}

TEST(DeltaSort, MatchesPairwiseOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  SignificanceConfig cfg;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 10;
    std::vector<std::string> ids;
    std::vector<MetricSeries> a, b;
    for (std::size_t s = 0; s < n; ++s) {
      ids.push_back("s" + std::to_string(s));
      const double la = u(rng), lb = u(rng);
      std::vector<double> va(6), vb(6);
      double sa = 0, sb = 0;
      for (int q = 0; q < 6; ++q) {
        va[q] = la + noise(rng);
        vb[q] = lb + noise(rng);
        sa += va[q];
        sb += vb[q];
      }
      a.push_back(series(Orientation::kHigherBetter, sa / 6, va));
      b.push_back(series(Orientation::kLowerBetter, sb / 6, vb));
    }
    DeltaSortResult r = delta_sort(ids, a, b, cfg);
    double best = 0;
    for (std::size_t s = 0; s < n; ++s) {
      int n0 = 0, n1 = 0;
      for (std::size_t o = 0; o < n; ++o) {
        if (o == s) continue;
        std::vector<double> xo, xs, yo, ys;
        for (const auto& [q, v] : a[o].per_query) xo.push_back(v);
        for (const auto& [q, v] : a[s].per_query) xs.push_back(v);
        for (const auto& [q, v] : b[o].per_query) yo.push_back(v);
        for (const auto& [q, v] : b[s].per_query) ys.push_back(v);
        if ((a[o].aggregate - a[s].aggregate) / a[s].aggregate >= 0.1 - 1e-12 &&
            paired_t_test(xo, xs) <= 0.05)
          ++n0;
        if ((b[s].aggregate - b[o].aggregate) / b[s].aggregate >= 0.1 - 1e-12 &&
            paired_t_test(yo, ys) <= 0.05)
          ++n1;
      }
      EXPECT_EQ(r.systems[s].n0, static_cast<std::size_t>(n0));
      EXPECT_EQ(r.systems[s].n1, static_cast<std::size_t>(n1));
      best = std::max(best, 100.0 * std::abs(n0 - n1) / n);
    }
    EXPECT_DOUBLE_EQ(r.max_delta_sort, best);
  }
}

TEST(Kendall, FrozenReferenceValues) {
  EXPECT_NEAR(kendall_tau_b(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}),
              0.6666666666666669, 1e-12);
  EXPECT_NEAR(
      kendall_tau_b(std::vector<double>{1, 2, 2, 3, 4}, std::vector<double>{1, 3, 2, 2, 4}),
      0.6666666666666666, 1e-12);
  EXPECT_NEAR(kendall_tau_b(std::vector<double>{0.3, 0.1, 0.1, 0.9, 0.5, 0.5},
                            std::vector<double>{2, 1, 1, 3, 3, 4}),
              0.7692307692307694, 1e-12);
}

TEST(Kendall, OrderingsIdenticalReversedSwapped) {
  std::vector<std::string> a{"s1", "s2", "s3", "s4"};
  std::vector<std::string> r{"s4", "s3", "s2", "s1"};
  std::vector<std::string> sw{"s1", "s3", "s2", "s4"};
  EXPECT_DOUBLE_EQ(kendall_tau(a, a), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(a, r), -1.0);
  EXPECT_NEAR(kendall_tau(a, sw), 2.0 / 3.0, 1e-15);
}

TEST(Kendall, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(9), y(9), ty(9);
    for (int i = 0; i < 9; ++i) {
      x[i] = u(rng);
      y[i] = 1.0 + std::round(u(rng) / 10);
      ty[i] = -1.0 / y[i];
    }
    EXPECT_NEAR(kendall_tau_b(x, y), kendall_tau_b(x, ty), 1e-12);
  }
}

TEST(Kendall, UndefinedCases) {
  EXPECT_EQ(thrown_kind([] {
              kendall_tau_b(std::vector<double>{1}, std::vector<double>{1});
            }),
            ErrorKind::kUndefinedMetric);
  EXPECT_EQ(thrown_kind([] {
              kendall_tau_b(std::vector<double>{1, 1}, std::vector<double>{1, 2});
            }),
            ErrorKind::kUndefinedMetric);
}

TEST(DeltaValue, Examples) {
  EXPECT_DOUBLE_EQ(delta_value(std::vector<double>{0.4, 0.5}, std::vector<double>{0.2, 0.25}), 0.5);
  EXPECT_DOUBLE_EQ(delta_value(std::vector<double>{0.4, 0.5}, std::vector<double>{0.4, 0.5}), 1.0);
  EXPECT_NEAR(delta_value(std::vector<double>{0.5}, std::vector<double>{1.0 / 25}), 0.08, 1e-15);
  EXPECT_EQ(thrown_kind([] {
              delta_value(std::vector<double>{0.0}, std::vector<double>{1.0});
            }),
            ErrorKind::kUndefinedRatio);
}

TEST(CrossTrack, Examples) {
  RangeSummary flat = cross_track_summary(std::vector<double>{50, 50, 50});
  EXPECT_DOUBLE_EQ(flat.low(), 50.0);
  EXPECT_DOUBLE_EQ(flat.high(), 50.0);
  RangeSummary two = cross_track_summary(std::vector<double>{26, 60});
  EXPECT_DOUBLE_EQ(two.mean, 43.0);
  EXPECT_DOUBLE_EQ(two.stddev, 17.0);
  EXPECT_DOUBLE_EQ(two.low(), 26.0);
  EXPECT_DOUBLE_EQ(two.high(), 60.0);
  RangeSummary sample = cross_track_summary(std::vector<double>{26, 60}, StdDevKind::kSample);
  EXPECT_NEAR(sample.stddev, 34.0 / std::sqrt(2.0), 1e-12);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  RangeSummary skip = cross_track_summary(std::vector<double>{nan, 10, 20});
  EXPECT_EQ(skip.count, 2u);
  EXPECT_DOUBLE_EQ(skip.mean, 15.0);
}

TEST(CrossTrack, GaussianSampleMeanWithinThreeStandardErrors) {
  std::mt19937_64 rng(76);
  std::normal_distribution<double> draw(40.0, 15.0);
  std::vector<double> v(76);
  for (auto& x : v) x = draw(rng);
  RangeSummary s = cross_track_summary(v);
  EXPECT_NEAR(s.mean, 40.0, 3.0 * 15.0 / std::sqrt(76.0));
}

}  // namespace
}  // namespace asl
