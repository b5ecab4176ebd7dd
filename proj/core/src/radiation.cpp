#include "radsearch/radiation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace radsearch::radiation {
namespace {

void normalize(SpectralTemplate& t) {
  const double sum = std::accumulate(t.begin(), t.end(), 0.0);
  for (double& v : t) v /= sum;
}

double two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double median_sorted(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void DetectorModel::validate() const {
  if (!(background_rate > 0.0)) throw ParameterError("background_rate must be positive");
  if (!(sensitivity_k >= 0.0)) throw ParameterError("sensitivity_k must be non-negative");
  if (!(min_distance_m > 0.0)) throw ParameterError("min_distance_m must be positive");
}

std::int64_t counts(const Spectrum& s) {
  std::int64_t sum = 0;
  for (std::uint32_t c : s) sum += c;
  return sum;
}

std::size_t energy_to_channel(double energy_kev) {
  if (!(energy_kev >= 0.0)) return 0;
  const auto ch = static_cast<std::size_t>(std::floor(energy_kev * kChannels / kMaxEnergyKeV));
  return std::min(ch, kChannels - 1);
}

SpectralTemplate photopeak_template(double line_kev, double sigma_channels, double continuum_fraction) {
  if (!(sigma_channels > 0.0)) throw ParameterError("photopeak sigma must be positive");
  if (continuum_fraction < 0.0 || continuum_fraction > 1.0)
    throw ParameterError("continuum fraction must be within [0,1]");
  const std::size_t peak = energy_to_channel(line_kev);
  const double centre = static_cast<double>(peak) + 0.5;

  SpectralTemplate gauss{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double z = (static_cast<double>(c) + 0.5 - centre) / sigma_channels;
    gauss[c] = std::exp(-0.5 * z * z);
  }
  normalize(gauss);

  SpectralTemplate t{};
  const double flat = continuum_fraction / static_cast<double>(peak + 1);
  for (std::size_t c = 0; c < kChannels; ++c)
    t[c] = (1.0 - continuum_fraction) * gauss[c] + (c <= peak ? flat : 0.0);
  normalize(t);
  return t;
}

SpectralTemplate background_template() {
  SpectralTemplate t{};
  const SpectralTemplate k40 = photopeak_template(1460.8, 4.0, 0.0);
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double e = (static_cast<double>(c) + 0.5) * kMaxEnergyKeV / kChannels;
    t[c] = std::exp(-e / 400.0);
  }
  normalize(t);
  for (std::size_t c = 0; c < kChannels; ++c) t[c] = 0.95 * t[c] + 0.05 * k40[c];
  normalize(t);
  return t;
}

double line_energy_kev(std::string_view nuclide) {
  if (nuclide == "Cs-137") return 661.657;
  if (nuclide == "Ba-133") return 356.013;
  if (nuclide == "Ho-166m") return 810.276;
  throw ParameterError("no line energy for nuclide '" + std::string(nuclide) + "'");
}

RadSource make_source(std::string nuclide, double half_life_yr, double activity_uci, Vec3 position) {
  if (!(activity_uci > 0.0)) throw ParameterError("source activity must be positive");
  RadSource s;
  s.spectral = photopeak_template(line_energy_kev(nuclide));
  s.nuclide = std::move(nuclide);
  s.half_life_yr = half_life_yr;
  s.activity_uci = activity_uci;
  s.position = position;
  return s;
}

std::vector<RadSource> check_sources(Vec3 position) {
  return {make_source("Cs-137", 30.2, 10.0, position), make_source("Ba-133", 10.7, 16.1, position),
          make_source("Ho-166m", 1200.0, 138.7, position),
          make_source("Ho-166m", 1200.0, 147.1, position)};
}

DetectorModel make_detector(double background_rate, double sensitivity_k) {
  DetectorModel d;
  d.background_rate = background_rate;
  d.sensitivity_k = sensitivity_k;
  d.background = background_template();
  d.validate();
  return d;
}

DetectorModel ground_detector(double aerial_k) {
  return make_detector(kGroundBackgroundRate, aerial_k * kGroundSensitivityScale);
}

double fit_sensitivity(double excess_rate, double activity_uci, double standoff_m) {
  if (!(activity_uci > 0.0) || !(standoff_m > 0.0) || excess_rate < 0.0)
    throw ParameterError("fit_sensitivity needs positive activity and standoff");
  return excess_rate * standoff_m * standoff_m / activity_uci;
}

double expected_rate(const DetectorModel& det, std::span<const RadSource> sources, Vec3 pos) {
  double rate = det.background_rate;
  for (const RadSource& s : sources) {
    const double dx = pos.x - s.position.x, dy = pos.y - s.position.y, dz = pos.z - s.position.z;
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < det.min_distance_m * det.min_distance_m)
      throw ProximityError("detector within " + std::to_string(std::sqrt(d2)) + " m of source " +
                           s.nuclide);
    rate += det.sensitivity_k * s.activity_uci / d2;
  }
  return rate;
}

Measurement sample_measurement(Rng& rng, const DetectorModel& det,
                               std::span<const RadSource> sources, Vec3 pos, double t) {
  const double total = expected_rate(det, sources, pos);

  // Mixture weights: background plus each source's inverse-square contribution.
  std::array<double, kChannels> cdf{};
  for (std::size_t c = 0; c < kChannels; ++c) cdf[c] = det.background_rate * det.background[c];
  for (const RadSource& s : sources) {
    const double dx = pos.x - s.position.x, dy = pos.y - s.position.y, dz = pos.z - s.position.z;
    const double contrib = det.sensitivity_k * s.activity_uci / (dx * dx + dy * dy + dz * dz);
    if (contrib == 0.0) continue;
    for (std::size_t c = 0; c < kChannels; ++c) cdf[c] += contrib * s.spectral[c];
  }
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  const double norm = cdf.back();

  Measurement m;
  m.t = t;
  m.pos = pos;
  std::poisson_distribution<std::int64_t> poisson(total);
  const std::int64_t n = poisson(rng);
  std::uniform_real_distribution<double> uniform(0.0, norm);
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = uniform(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++m.spectrum[static_cast<std::size_t>(it - cdf.begin())];
  }
  m.counts = counts(m.spectrum);
  return m;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() < 2 || b.size() < 2) throw ParameterError("t-test needs at least 2 samples per group");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma) / static_cast<double>(a.size());
  const double vb = sample_variance(b, mb) / static_cast<double>(b.size());
  const double se2 = va + vb;
  TTestResult r;
  if (se2 == 0.0) {
    if (ma == mb) throw UndefinedStatisticError("both samples constant with equal means");
    r.t_stat = ma > mb ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    r.dof = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = 0.0;
    r.reject = true;
    return r;
  }
  r.t_stat = (ma - mb) / std::sqrt(se2);
  const double na1 = static_cast<double>(a.size() - 1), nb1 = static_cast<double>(b.size() - 1);
  r.dof = se2 * se2 / (va * va / na1 + vb * vb / nb1);
  r.p_value = two_sided_p(r.t_stat, r.dof);
  r.reject = r.p_value < alpha;
  return r;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) throw ParameterError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw ParameterError("t-test needs at least 2 samples per group");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double md = mean_of(d);
  const double vd = sample_variance(d, md);
  TTestResult r;
  r.dof = static_cast<double>(d.size() - 1);
  if (vd == 0.0) {
    if (md == 0.0) throw UndefinedStatisticError("paired differences are all zero");
    r.t_stat = md > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.reject = true;
    return r;
  }
  r.t_stat = md / std::sqrt(vd / static_cast<double>(d.size()));
  r.p_value = two_sided_p(r.t_stat, r.dof);
  r.reject = r.p_value < alpha;
  return r;
}

Poi max_counts_poi(std::span<const Measurement> ms) {
  if (ms.empty()) throw EmptyInputError("max_counts_poi on empty measurement list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ms.size(); ++i) {
    if (ms[i].counts > ms[best].counts ||
        (ms[i].counts == ms[best].counts && ms[i].t < ms[best].t))
      best = i;
  }
  return {best, ms[best].pos, ms[best].counts};
}

double median_nearest_k(std::span<const Measurement> ms, double x, double y, std::size_t k) {
  if (k < 1 || k > ms.size()) throw ParameterError("k must be within [1, number of measurements]");
  std::vector<std::pair<double, std::size_t>> dist(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double dx = ms[i].pos.x - x, dy = ms[i].pos.y - y;
    dist[i] = {dx * dx + dy * dy, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<double> vals(k);
  for (std::size_t i = 0; i < k; ++i) vals[i] = static_cast<double>(ms[dist[i].second].counts);
  return median_sorted(vals);
}

std::vector<HistogramBin> counts_histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw ParameterError("bin width must be positive");
  std::vector<HistogramBin> bins;
  if (values.empty()) return bins;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const auto nbins = static_cast<std::size_t>(std::floor((hi - lo) / bin_width)) + 1;
  bins.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    bins[i].lower = lo + static_cast<double>(i) * bin_width;
    bins[i].upper = lo + static_cast<double>(i + 1) * bin_width;
  }
  for (double v : values) {
    auto idx = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
    ++bins[std::min(idx, nbins - 1)].count;
  }
  return bins;
}

std::vector<double> counts_series(std::span<const Measurement> ms) {
  std::vector<double> out(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) out[i] = static_cast<double>(ms[i].counts);
  return out;
}

std::vector<HistogramBin> counts_histogram(std::span<const Measurement> ms, double bin_width) {
  const auto values = counts_series(ms);
  return counts_histogram(values, bin_width);
}

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = mean_of(values);
  s.stddev = values.size() > 1 ? std::sqrt(sample_variance(values, s.mean)) : 0.0;
  return s;
}

}  // namespace radsearch::radiation
