#pragma once

// Gamma detector simulation and count analysis.
//
// A measurement is one 1 s integration: a 1024-channel spectrum over 0-3000 keV
// whose channel sum ("counts") drives every decision downstream.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radsearch/errors.hpp"
#include "radsearch/rng.hpp"

namespace radsearch::radiation {

inline constexpr std::size_t kChannels = 1024;
inline constexpr double kMaxEnergyKeV = 3000.0;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

using Spectrum = std::array<std::uint32_t, kChannels>;

/// Channel probabilities, non-negative and summing to 1.
using SpectralTemplate = std::array<double, kChannels>;

struct Measurement {
  double t = 0.0;  // seconds since mission start
  Vec3 pos;
  Spectrum spectrum{};
  std::int64_t counts = 0;  // always equal to the channel sum
};

struct RadSource {
  std::string nuclide;
  double half_life_yr = 0.0;
  double activity_uci = 0.0;
  Vec3 position;
  SpectralTemplate spectral{};
};

struct DetectorModel {
  double background_rate = 436.1;  // expected counts per 1 s integration
  double sensitivity_k = 0.0;      // counts * m^2 / (uCi * s)
  SpectralTemplate background{};
  double min_distance_m = 0.3;

  void validate() const;
};

// Published detector statistics (counts per 1 s, N = 600 each).
inline constexpr double kAerialBackgroundRate = 436.1;   // NaI on the helicopter
inline constexpr double kAerialBackgroundSigma = 20.8;
inline constexpr double kAerialCsCalibrationRate = 739.7;
inline constexpr double kGroundBackgroundRate = 1469.4;  // RSI 701 on the UGV
inline constexpr double kGroundBackgroundSigma = 42.7;
inline constexpr double kGroundCsCalibrationRate = 1956.5;

// Survey flight statistics.
inline constexpr double kMission1BackgroundMean = 558.0;
inline constexpr double kMission1SourceMean = 606.7;
inline constexpr double kMission2BackgroundMean = 593.9;
inline constexpr double kMission2SourceMean = 617.6;
inline constexpr double kMission2HoNearest10Median = 658.0;
inline constexpr double kMission2BaCsNearest10Median = 617.5;

std::int64_t counts(const Spectrum& s);

/// channel = floor(E * 1024 / 3000), clamped to the last channel.
std::size_t energy_to_channel(double energy_kev);

/// Gaussian photopeak (70% of mass) over a flat continuum spanning channels [0, peak].
SpectralTemplate photopeak_template(double line_kev, double sigma_channels = 2.5,
                                    double continuum_fraction = 0.3);

/// Falling exponential continuum with a K-40 line; the environmental background shape.
SpectralTemplate background_template();

/// Dominant gamma line for the nuclides used here: Cs-137, Ba-133, Ho-166m.
double line_energy_kev(std::string_view nuclide);

RadSource make_source(std::string nuclide, double half_life_yr, double activity_uci, Vec3 position);

/// The four check sources: Cs-137 10.0, Ba-133 16.1, Ho-166m 138.7 and 147.1 uCi.
std::vector<RadSource> check_sources(Vec3 position);

DetectorModel make_detector(double background_rate, double sensitivity_k);

/// Ratio of the Cs-137 excess next to the ground detector to that next to the aerial one.
inline constexpr double kGroundSensitivityScale =
    (kGroundCsCalibrationRate - kGroundBackgroundRate) / (kAerialCsCalibrationRate - kAerialBackgroundRate);

/// UGV detector: ground background rate, aerial sensitivity scaled by kGroundSensitivityScale.
DetectorModel ground_detector(double aerial_k);

/// Solves k so that `activity_uci` at `standoff_m` adds `excess_rate` counts/s.
double fit_sensitivity(double excess_rate, double activity_uci, double standoff_m);

/// background + sum k * A_i / d_i^2. Throws ProximityError inside min_distance_m.
double expected_rate(const DetectorModel& det, std::span<const RadSource> sources, Vec3 pos);

/// Poisson total, multinomial channels over the rate-weighted template mixture.
Measurement sample_measurement(Rng& rng, const DetectorModel& det,
                               std::span<const RadSource> sources, Vec3 pos, double t);

struct TTestResult {
  double t_stat = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool reject = false;
};

inline constexpr double kSignificance = 0.05;

/// Two-sided Welch test with Welch-Satterthwaite degrees of freedom.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                         double alpha = kSignificance);

/// Two-sided paired test; requires equal lengths.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          double alpha = kSignificance);

struct Poi {
  std::size_t index = 0;
  Vec3 position;
  std::int64_t counts = 0;
};

/// Measurement with the largest counts; ties go to the earliest timestamp.
Poi max_counts_poi(std::span<const Measurement> ms);

/// Median counts of the k measurements nearest (in x/y) to a point.
double median_nearest_k(std::span<const Measurement> ms, double x, double y, std::size_t k);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

/// Bins of width `bin_width` starting at the minimum value.
std::vector<HistogramBin> counts_histogram(std::span<const double> values, double bin_width);
std::vector<HistogramBin> counts_histogram(std::span<const Measurement> ms, double bin_width);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
};

SampleStats summarize(std::span<const double> values);
std::vector<double> counts_series(std::span<const Measurement> ms);

// File formats.
void write_measurements_csv(std::span<const Measurement> ms, const std::filesystem::path& path);
/// The counts column is recomputed from the channels.
std::vector<Measurement> read_measurements_csv(const std::filesystem::path& path);
void write_sources_json(std::span<const RadSource> sources, const std::filesystem::path& path);
std::vector<RadSource> read_sources_json(const std::filesystem::path& path);

}  // namespace radsearch::radiation
