#pragma once

#include "floodiam/rng.hpp"

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

namespace floodiam {

struct Gumbel {
  double location_mm = 0.0;
  double scale_mm = 1.0;
};

/// Log-normal in millimetres: log(intensity) ~ Normal(mu, sigma).
struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Resampling distribution over observed daily totals (sorted ascending).
struct Empirical {
  std::vector<double> samples_mm;
};

using DistributionSpec = std::variant<Gumbel, LogNormal, Empirical>;

struct RainfallPeriod {
  int year_start = 0;
  int year_end = 0;
  DistributionSpec distribution;
};

struct RainfallEvent {
  int year = 0;
  double intensity_mm = 0.0;
};

/// Per-period intensity distributions tiling [start_year, end_year].
/// Immutable once built.
class RainfallModel {
 public:
  int start_year() const { return start_year_; }
  int end_year() const { return end_year_; }
  int year_count() const { return end_year_ - start_year_ + 1; }
  const std::vector<RainfallPeriod>& periods() const { return periods_; }

  bool covers(int year) const { return year >= start_year_ && year <= end_year_; }
  /// Throws ValidationError if `year` is outside the covered range.
  const DistributionSpec& distribution_for(int year) const;

 private:
  friend RainfallModel build_rainfall_model(std::vector<RainfallPeriod>, int, int);
  int start_year_ = 0;
  int end_year_ = 0;
  std::vector<RainfallPeriod> periods_;
};

/// Validates and orders the periods. Periods must tile the horizon with no
/// gap or overlap; Empirical samples are sorted on the way in.
RainfallModel build_rainfall_model(std::vector<RainfallPeriod> periods, int start_year,
                                   int end_year);

/// Inverse CDF of the untruncated distribution at probability p in (0, 1).
/// For Empirical this is the lower order statistic x[ceil(p*n) - 1].
double quantile(const DistributionSpec& dist, double p);

/// Draws the year's event from its period distribution. Negative draws are
/// truncated to 0.
RainfallEvent sample_annual_event(const RainfallModel& model, int year, RngStream rng);

/// Substream for the given year; sample_annual_event(model, y, year_stream(s, y))
/// is what event_series uses for year y.
RngStream year_stream(std::uint64_t seed, int year);

std::vector<RainfallEvent> event_series(const RainfallModel& model, std::uint64_t seed);

/// Nine cut points separating intensity deciles, pooled over every year of
/// the horizon by Monte Carlo.
using DecileEdges = std::array<double, 9>;
DecileEdges intensity_decile_edges(const RainfallModel& model, std::uint64_t seed,
                                   int draws_per_year = 2000);
/// Decile index in [0, 9]: the number of cut points at or below `intensity_mm`.
int intensity_decile(const DecileEdges& edges, double intensity_mm);

}  // namespace floodiam
