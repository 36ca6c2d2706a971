#include "floodiam/rainfall.hpp"

#include "floodiam/common.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace floodiam {

namespace {

void validate_distribution(DistributionSpec& dist, int year_start) {
  const std::string where = "rainfall period starting " + std::to_string(year_start);
  std::visit(
      [&](auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gumbel>) {
          if (!std::isfinite(d.location_mm) || !(d.scale_mm > 0.0) || !std::isfinite(d.scale_mm))
            throw ValidationError(where + ": Gumbel scale must be positive and finite");
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (!std::isfinite(d.mu) || !(d.sigma > 0.0) || !std::isfinite(d.sigma))
            throw ValidationError(where + ": LogNormal sigma must be positive and finite");
        } else {
          if (d.samples_mm.empty()) throw ValidationError(where + ": empty empirical sample");
          for (double v : d.samples_mm) {
            if (!std::isfinite(v) || v < 0.0)
              throw ValidationError(where + ": empirical samples must be finite and non-negative");
          }
          std::sort(d.samples_mm.begin(), d.samples_mm.end());
        }
      },
      dist);
}

// Acklam's rational approximation refined by one Halley step.
double inverse_standard_normal(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

}  // namespace

const DistributionSpec& RainfallModel::distribution_for(int year) const {
  if (!covers(year)) {
    throw ValidationError("year " + std::to_string(year) + " outside rainfall coverage [" +
                          std::to_string(start_year_) + ", " + std::to_string(end_year_) + "]");
  }
  auto it = std::upper_bound(periods_.begin(), periods_.end(), year,
                             [](int y, const RainfallPeriod& p) { return y < p.year_start; });
  return std::prev(it)->distribution;
}

RainfallModel build_rainfall_model(std::vector<RainfallPeriod> periods, int start_year,
                                   int end_year) {
  if (start_year > end_year) throw ValidationError("rainfall horizon: start_year after end_year");
  if (periods.empty()) throw ValidationError("rainfall model needs at least one period");
  std::sort(periods.begin(), periods.end(),
            [](const RainfallPeriod& a, const RainfallPeriod& b) { return a.year_start < b.year_start; });
  int expected = start_year;
  for (auto& period : periods) {
    if (period.year_end < period.year_start) {
      throw ValidationError("rainfall period " + std::to_string(period.year_start) + "-" +
                            std::to_string(period.year_end) + " ends before it starts");
    }
    if (period.year_start > expected) {
      throw ValidationError("rainfall coverage gap at " + std::to_string(expected));
    }
    if (period.year_start < expected) {
      throw ValidationError("rainfall periods overlap at " + std::to_string(period.year_start));
    }
    validate_distribution(period.distribution, period.year_start);
    expected = period.year_end + 1;
  }
  if (expected != end_year + 1) {
    if (expected <= end_year)
      throw ValidationError("rainfall coverage gap at " + std::to_string(expected));
    throw ValidationError("rainfall periods extend past end year " + std::to_string(end_year));
  }
  RainfallModel model;
  model.start_year_ = start_year;
  model.end_year_ = end_year;
  model.periods_ = std::move(periods);
  return model;
}

double quantile(const DistributionSpec& dist, double p) {
  return std::visit(
      [p](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gumbel>) {
          return d.location_mm - d.scale_mm * std::log(-std::log(p));
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          return std::exp(d.mu + d.sigma * inverse_standard_normal(p));
        } else {
          const auto n = d.samples_mm.size();
          auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
          rank = std::clamp<std::size_t>(rank, 1, n);
          return d.samples_mm[rank - 1];
        }
      },
      dist);
}

RngStream year_stream(std::uint64_t seed, int year) {
  return RngStream::keyed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(year)));
}

RainfallEvent sample_annual_event(const RainfallModel& model, int year, RngStream rng) {
  const auto& dist = model.distribution_for(year);
  const double u = rng.uniform_open();
  const double value = quantile(dist, u);
  return RainfallEvent{year, std::max(0.0, value)};
}

std::vector<RainfallEvent> event_series(const RainfallModel& model, std::uint64_t seed) {
  std::vector<RainfallEvent> events;
  events.reserve(static_cast<std::size_t>(model.year_count()));
  for (int year = model.start_year(); year <= model.end_year(); ++year) {
    events.push_back(sample_annual_event(model, year, year_stream(seed, year)));
  }
  return events;
}

DecileEdges intensity_decile_edges(const RainfallModel& model, std::uint64_t seed,
                                   int draws_per_year) {
  std::vector<double> pool;
  pool.reserve(static_cast<std::size_t>(model.year_count()) *
               static_cast<std::size_t>(draws_per_year));
  for (int year = model.start_year(); year <= model.end_year(); ++year) {
    RngStream rng = year_stream(seed, year);
    const auto& dist = model.distribution_for(year);
    for (int k = 0; k < draws_per_year; ++k) {
      pool.push_back(std::max(0.0, quantile(dist, rng.uniform_open())));
    }
  }
  std::sort(pool.begin(), pool.end());
  DecileEdges edges{};
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double p = static_cast<double>(k + 1) / 10.0;
    auto idx = static_cast<std::size_t>(p * static_cast<double>(pool.size()));
    edges[k] = pool[std::min(idx, pool.size() - 1)];
  }
  return edges;
}

int intensity_decile(const DecileEdges& edges, double intensity_mm) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), intensity_mm) - edges.begin());
}

}  // namespace floodiam
