#pragma once

#include <span>
#include <string>
#include <vector>

#include "danmaku/sim.hpp"

namespace danmaku {

/// Shooting frequency, mean momentum and coverage of one danmaku.
struct MetricsReport {
  double sf = 0.0;
  double mm = 0.0;
  double cov = 0.0;
};

enum class Metric { sf, mm, cov };
inline constexpr Metric kAllMetrics[] = {Metric::sf, Metric::mm, Metric::cov};
std::string_view metric_name(Metric m);
double metric_value(const MetricsReport& r, Metric m);

/// L / T_shoot.
double shooting_frequency(const SimTrace& trace);
/// Per-frame sum of weight * speed over on-screen bullets, averaged over T_total.
double mean_momentum(const SimTrace& trace);
/// Fraction of grid cells touched by any bullet at any frame.
double coverage(const SimTrace& trace);

MetricsReport evaluate(const SimTrace& trace);
MetricsReport evaluate(const ParametricSequence& seq, const SimConfig& config = {});

std::string to_json(const MetricsReport& report);

/// Jensen-Shannon divergence (nats) between histograms of two samples.
/// Both are binned over their pooled [min, max] with `bins` equal-width
/// bins, each bin gets 1e-6 extra mass, then renormalized. Returns 0 when
/// every pooled value is equal. Throws ValidationError on an empty sample.
double js_divergence(std::span<const double> a, std::span<const double> b, int bins = 16);

struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;  ///< population (divide by n)
};
SampleStats sample_stats(std::span<const double> values);

}  // namespace danmaku
