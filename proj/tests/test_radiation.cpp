#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "radsearch/radiation.hpp"
#include "radsearch/survey.hpp"
#include "test_util.hpp"

using namespace radsearch;
using namespace radsearch::radiation;

namespace {

Measurement with_counts(double t, double x, double y, std::uint32_t c) {
  Measurement m;
  m.t = t;
  m.pos = {x, y, 0.0};
  m.spectrum[0] = c;
  m.counts = c;
  return m;
}

std::vector<double> to_double(const std::vector<long>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Counts, Trivial) {
  Spectrum s{};
  EXPECT_EQ(counts(s), 0);
  s[17] = 7;
  EXPECT_EQ(counts(s), 7);
}

TEST(Counts, MatchesLoopSum) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> u(0, 5000);
  Spectrum s{};
  std::int64_t want = 0;
  for (auto& c : s) {
    c = u(rng);
    want += c;
  }
  EXPECT_EQ(counts(s), want);
}

TEST(Templates, NormalisedAndNonNegative) {
  for (const auto& t : {photopeak_template(661.657), photopeak_template(356.013),
                        photopeak_template(810.276), background_template()}) {
    double sum = 0.0;
    for (double p : t) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Templates, ChannelMapping) {
  EXPECT_EQ(energy_to_channel(0.0), 0u);
  EXPECT_EQ(energy_to_channel(661.657), 225u);
  EXPECT_EQ(energy_to_channel(3000.0), kChannels - 1);
  const auto t = photopeak_template(661.657);
  EXPECT_EQ(std::max_element(t.begin(), t.end()) - t.begin(), 225);
}

TEST(Sources, CheckSourceActivities) {
  const auto s = check_sources({1, 2, 3});
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].activity_uci, 10.0);
  EXPECT_EQ(s[1].activity_uci, 16.1);
  EXPECT_EQ(s[2].activity_uci, 138.7);
  EXPECT_EQ(s[3].activity_uci, 147.1);
  for (const auto& src : s) EXPECT_EQ(src.position, (Vec3{1, 2, 3}));
  EXPECT_THROW(make_source("Cs-137", 30.2, 0.0, {}), ParameterError);
}

TEST(ExpectedRate, NoSourcesIsBackground) {
  const DetectorModel det = make_detector(436.1, 5.0);
  EXPECT_EQ(expected_rate(det, {}, {0, 0, 0}), 436.1);
}

TEST(ExpectedRate, InverseSquare) {
  const DetectorModel det = make_detector(100.0, 2.0);
  const std::vector<RadSource> src{make_source("Cs-137", 30.2, 10.0, {0, 0, 0})};
  const double near = expected_rate(det, src, {3, 0, 0}) - 100.0;
  const double far = expected_rate(det, src, {6, 0, 0}) - 100.0;
  EXPECT_NEAR(near / far, 4.0, 1e-12);
  EXPECT_THROW(expected_rate(det, src, {0.1, 0, 0}), ProximityError);
}

TEST(ExpectedRate, FittedHoPairExcess) {
  const double k = fit_sensitivity(kMission2HoNearest10Median - kMission2BackgroundMean, 285.8, 29.0);
  const DetectorModel det = make_detector(kMission2BackgroundMean, k);
  const std::vector<RadSource> ho{make_source("Ho-166m", 1200.0, 138.7, {0, 0, 0}),
                                  make_source("Ho-166m", 1200.0, 147.1, {0, 0, 0})};
  EXPECT_NEAR(expected_rate(det, ho, {0, 0, 29.0}), 658.0, 1e-9);
  EXPECT_NEAR(k, survey::fitted_aerial_sensitivity(), 1e-12);
  const double excess30 = expected_rate(det, ho, {0, 0, 30.0}) - kMission2BackgroundMean;
  EXPECT_GT(excess30, 55.0);
  EXPECT_LT(excess30, 65.0);
}

TEST(DetectorModel, RejectsBadParameters) {
  EXPECT_THROW(make_detector(0.0, 1.0), ParameterError);
  EXPECT_THROW(make_detector(10.0, -1.0), ParameterError);
}

TEST(GroundDetector, ScalesAerialSensitivity) {
  const DetectorModel g = ground_detector(2.0);
  EXPECT_EQ(g.background_rate, kGroundBackgroundRate);
  EXPECT_NEAR(g.sensitivity_k, 2.0 * (1956.5 - 1469.4) / (739.7 - 436.1), 1e-12);
}

TEST(Sampling, BackgroundMatchesPublishedStatistics) {
  Rng rng = make_rng(2024);
  const DetectorModel det = make_detector(kAerialBackgroundRate, 0.0);
  std::vector<double> c;
  for (int i = 0; i < 600; ++i) {
    const Measurement m = sample_measurement(rng, det, {}, {0, 0, 30}, i);
    EXPECT_EQ(m.counts, counts(m.spectrum));
    c.push_back(static_cast<double>(m.counts));
  }
  const SampleStats s = summarize(c);
  EXPECT_NEAR(s.mean, 436.1, 3 * std::sqrt(436.1 / 600));
  EXPECT_NEAR(s.stddev, 20.8, 0.15 * 20.8);
}

TEST(Sampling, PoissonMeanAndVariance) {
  Rng rng = make_rng(11);
  const DetectorModel det = make_detector(250.0, 0.0);
  const int n = 10000;
  std::vector<double> c(n);
  for (int i = 0; i < n; ++i) c[i] = static_cast<double>(sample_measurement(rng, det, {}, {}, i).counts);
  const SampleStats s = summarize(c);
  EXPECT_LT(std::abs(s.mean - 250.0), 4 * std::sqrt(250.0 / n));
  EXPECT_LT(std::abs(s.stddev * s.stddev / 250.0 - 1.0), 0.1);
}

TEST(Sampling, ZeroSensitivityEqualsBackgroundOnly) {
  const DetectorModel det = make_detector(300.0, 0.0);
  const auto src = check_sources({0, 0, 0});
  Rng a = make_rng(5), b = make_rng(5);
  for (int i = 0; i < 20; ++i) {
    const Measurement ma = sample_measurement(a, det, src, {5, 0, 0}, i);
    const Measurement mb = sample_measurement(b, det, {}, {5, 0, 0}, i);
    EXPECT_EQ(ma.spectrum, mb.spectrum);
  }
}

TEST(Sampling, SeededSequenceIsReproducible) {
  const DetectorModel det = make_detector(400.0, 1.0);
  const auto src = check_sources({0, 0, 0});
  Rng a = make_rng(77), b = make_rng(77);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(sample_measurement(a, det, src, {i * 1.0, 3, 1}, i).spectrum,
              sample_measurement(b, det, src, {i * 1.0, 3, 1}, i).spectrum);
  }
}

TEST(Welch, HandWorkedCase) {
  const std::vector<long> a{1, 2, 3, 4}, b{2, 4, 6, 8, 10};
  const auto da = to_double(a), db = to_double(b);
  const TTestResult r = welch_t_test(da, db);
  EXPECT_NEAR(r.t_stat, -3.5 / std::sqrt(29.0 / 12.0), 1e-12);
  EXPECT_NEAR(r.dof, 2523.0 / 457.0, 1e-12);
  // scipy.stats.t.sf(|t|, dof) * 2
  EXPECT_NEAR(r.p_value, 0.0691335931923923, 1e-10);
  EXPECT_FALSE(r.reject);
}

TEST(Welch, MatchesRationalOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<long> val(400, 700);
    std::uniform_int_distribution<int> len(2, 40);
    std::vector<long> a(len(rng)), b(len(rng));
    for (auto& v : a) v = val(rng);
    for (auto& v : b) v = val(rng) + 10;
    const auto want = oracle::rational_welch(a, b);
    const auto da = to_double(a), db = to_double(b);
    const TTestResult r = welch_t_test(da, db);
    EXPECT_NEAR(r.t_stat * r.t_stat, want.t_squared, 1e-9 * std::max(1.0, want.t_squared));
    EXPECT_NEAR(r.dof, want.dof, 1e-9 * want.dof);
    EXPECT_EQ(std::signbit(r.t_stat), want.mean_difference < 0);
  }
}

TEST(Welch, IdenticalSamplesDoNotReject) {
  const std::vector<double> a{5, 7, 9, 4};
  const TTestResult r = welch_t_test(a, a);
  EXPECT_EQ(r.t_stat, 0.0);
  EXPECT_FALSE(r.reject);
}

TEST(Welch, SymmetricUnderSwap) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n1(10, 2), n2(11, 3);
  std::vector<double> a(30), b(45);
  for (auto& v : a) v = n1(rng);
  for (auto& v : b) v = n2(rng);
  const TTestResult ab = welch_t_test(a, b), ba = welch_t_test(b, a);
  EXPECT_DOUBLE_EQ(ab.t_stat, -ba.t_stat);
  EXPECT_EQ(ab.p_value, ba.p_value);
  EXPECT_EQ(ab.dof, ba.dof);
}

TEST(Welch, PublishedMission1FlightsReject) {
  std::mt19937_64 rng(558);
  std::normal_distribution<double> bg(558.0, 38.9), src(606.7, 48.1);
  std::vector<double> a(1200), b(1200);
  for (auto& v : a) v = bg(rng);
  for (auto& v : b) v = src(rng);
  EXPECT_TRUE(welch_t_test(a, b).reject);
}

TEST(Welch, ConstantEqualSamplesUndefined) {
  const std::vector<double> a{3, 3, 3}, b{3, 3};
  EXPECT_THROW(welch_t_test(a, b), UndefinedStatisticError);
  const std::vector<double> one{1};
  EXPECT_THROW(welch_t_test(one, b), ParameterError);
}

TEST(Paired, RequiresEqualLengths) {
  const std::vector<double> a{1, 2, 3}, b{1, 2};
  EXPECT_THROW(paired_t_test(a, b), ParameterError);
  const std::vector<double> c{2, 3, 5}, d{1, 1, 1};
  const TTestResult r = paired_t_test(c, d);
  // differences 1,2,4: mean 7/3, sd sqrt(7/3)
  EXPECT_NEAR(r.t_stat, (7.0 / 3.0) / std::sqrt(7.0 / 3.0 / 3.0), 1e-12);
  EXPECT_EQ(r.dof, 2.0);
}

TEST(Poi, SingleAndTies) {
  const std::vector<Measurement> one{with_counts(0, 1, 2, 5)};
  EXPECT_EQ(max_counts_poi(one).index, 0u);
  const std::vector<Measurement> ms{with_counts(0, 0, 0, 3), with_counts(1, 1, 0, 9),
                                    with_counts(2, 2, 0, 9), with_counts(3, 3, 0, 1)};
  const Poi p = max_counts_poi(ms);
  EXPECT_EQ(p.index, 1u);
  EXPECT_EQ(p.counts, 9);
  EXPECT_EQ(p.position, (Vec3{1, 0, 0}));
  EXPECT_THROW(max_counts_poi(std::vector<Measurement>{}), EmptyInputError);
}

TEST(Poi, TieGoesToEarliestTimestampNotPosition) {
  const std::vector<Measurement> ms{with_counts(5, 0, 0, 9), with_counts(2, 1, 0, 9)};
  EXPECT_EQ(max_counts_poi(ms).index, 1u);
}

TEST(Poi, InvariantUnderShiftAndPositiveScaling) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::uint32_t> u(0, 50);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Measurement> ms, shifted, scaled;
    for (int i = 0; i < 25; ++i) {
      const std::uint32_t c = u(rng);
      ms.push_back(with_counts(i, i, 0, c));
      shifted.push_back(with_counts(i, i, 0, c + 100));
      scaled.push_back(with_counts(i, i, 0, c * 3));
    }
    const std::size_t want = max_counts_poi(ms).index;
    EXPECT_EQ(max_counts_poi(shifted).index, want);
    EXPECT_EQ(max_counts_poi(scaled).index, want);
  }
}

TEST(MedianNearest, TrivialCases) {
  const std::vector<Measurement> ms{with_counts(0, 0, 0, 10), with_counts(1, 5, 0, 20),
                                    with_counts(2, 10, 0, 30), with_counts(3, 15, 0, 40)};
  EXPECT_EQ(median_nearest_k(ms, 9, 0, 1), 30.0);
  EXPECT_EQ(median_nearest_k(ms, 0, 0, 4), 25.0);
  EXPECT_EQ(median_nearest_k(ms, 0, 0, 3), 20.0);
  EXPECT_THROW(median_nearest_k(ms, 0, 0, 5), ParameterError);
}

TEST(MedianNearest, MatchesSortOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(-50, 50);
  std::uniform_int_distribution<std::uint32_t> cnt(0, 1000);
  std::vector<Measurement> ms;
  for (int i = 0; i < 200; ++i) ms.push_back(with_counts(i, pos(rng), pos(rng), cnt(rng)));
  for (std::size_t k : {1u, 2u, 7u, 10u, 51u, 200u}) {
    const double qx = pos(rng), qy = pos(rng);
    std::vector<std::pair<double, double>> d;
    for (const auto& m : ms)
      d.push_back({std::hypot(m.pos.x - qx, m.pos.y - qy), static_cast<double>(m.counts)});
    std::sort(d.begin(), d.end());
    std::vector<double> v;
    for (std::size_t i = 0; i < k; ++i) v.push_back(d[i].second);
    std::sort(v.begin(), v.end());
    const double want = k % 2 ? v[k / 2] : (v[k / 2 - 1] + v[k / 2]) / 2.0;
    EXPECT_EQ(median_nearest_k(ms, qx, qy, k), want) << k;
  }
}

TEST(Histogram, TrivialCases) {
  EXPECT_TRUE(counts_histogram(std::vector<double>{}, 5.0).empty());
  const auto one = counts_histogram(std::vector<double>{42.0}, 5.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].count, 1u);
  EXPECT_THROW(counts_histogram(std::vector<double>{1.0}, 0.0), ParameterError);
}

TEST(Histogram, MatchesCountingOracle) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> u(400, 700);
  std::vector<double> v(500);
  for (auto& x : v) x = u(rng);
  const double w = 7.0;
  const auto bins = counts_histogram(v, w);
  const double lo = *std::min_element(v.begin(), v.end());
  std::size_t total = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    std::size_t want = 0;
    for (double x : v) {
      const bool last = i + 1 == bins.size();
      if (x >= lo + i * w && (x < lo + (i + 1) * w || last)) ++want;
    }
    EXPECT_EQ(bins[i].count, want) << i;
    total += bins[i].count;
  }
  EXPECT_EQ(total, v.size());
}

TEST(MeasurementsCsv, RoundTripAndRecomputedCounts) {
  testutil::TempDir tmp;
  Rng rng = make_rng(9);
  const DetectorModel det = make_detector(200.0, 1.0);
  const auto src = check_sources({0, 0, 0});
  std::vector<Measurement> ms;
  for (int i = 0; i < 5; ++i) ms.push_back(sample_measurement(rng, det, src, {i + 0.25, -1.5, 30}, i * 1.0));
  write_measurements_csv(ms, tmp / "m.csv");
  const auto back = read_measurements_csv(tmp / "m.csv");
  ASSERT_EQ(back.size(), ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    EXPECT_EQ(back[i].t, ms[i].t);
    EXPECT_EQ(back[i].pos, ms[i].pos);
    EXPECT_EQ(back[i].spectrum, ms[i].spectrum);
    EXPECT_EQ(back[i].counts, counts(back[i].spectrum));
  }

  // A stale counts column is ignored in favour of the channel sum.
  std::string text = testutil::read_file(tmp / "m.csv");
  const std::size_t line2 = text.find('\n') + 1;
  std::size_t p = line2;
  for (int f = 0; f < 4; ++f) p = text.find(',', p) + 1;
  const std::size_t e = text.find(',', p);
  text.replace(p, e - p, "123456789");
  testutil::write_file(tmp / "stale.csv", text);
  EXPECT_EQ(read_measurements_csv(tmp / "stale.csv")[0].counts, counts(ms[0].spectrum));
}

TEST(MeasurementsCsv, MalformedInputs) {
  testutil::TempDir tmp;
  testutil::write_file(tmp / "h.csv", "a,b,c\n");
  EXPECT_THROW(read_measurements_csv(tmp / "h.csv"), ParseError);
  testutil::write_file(tmp / "short.csv", "t,x,y,z,counts\n0,1,2,3,4\n");
  try {
    read_measurements_csv(tmp / "short.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(read_measurements_csv(tmp / "missing.csv"), IoError);
}

TEST(SourcesJson, RoundTrip) {
  testutil::TempDir tmp;
  const auto src = check_sources({10.5, -3, 1});
  write_sources_json(src, tmp / "s.json");
  const auto back = read_sources_json(tmp / "s.json");
  ASSERT_EQ(back.size(), src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    EXPECT_EQ(back[i].nuclide, src[i].nuclide);
    EXPECT_EQ(back[i].activity_uci, src[i].activity_uci);
    EXPECT_EQ(back[i].position, src[i].position);
    EXPECT_EQ(back[i].spectral, src[i].spectral);
  }
}
