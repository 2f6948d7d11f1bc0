#include "danmaku/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "danmaku/error.hpp"

namespace danmaku {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::sf: return "sf";
    case Metric::mm: return "mm";
    case Metric::cov: return "cov";
  }
  return "?";
}

double metric_value(const MetricsReport& r, Metric m) {
  switch (m) {
    case Metric::sf: return r.sf;
    case Metric::mm: return r.mm;
    case Metric::cov: return r.cov;
  }
  return 0.0;
}

double shooting_frequency(const SimTrace& trace) {
  return static_cast<double>(trace.shots) / static_cast<double>(std::max(1, trace.t_shoot));
}

double mean_momentum(const SimTrace& trace) {
  if (trace.t_total <= 0) return 0.0;
  double total = 0.0;
  for (double m : trace.momentum_per_frame) total += m;
  return total / static_cast<double>(trace.t_total);
}

double coverage(const SimTrace& trace) {
  const double cells = static_cast<double>(trace.rows) * static_cast<double>(trace.cols);
  return cells > 0 ? static_cast<double>(trace.covered_cells) / cells : 0.0;
}

MetricsReport evaluate(const SimTrace& trace) {
  return {shooting_frequency(trace), mean_momentum(trace), coverage(trace)};
}

MetricsReport evaluate(const ParametricSequence& seq, const SimConfig& config) { return evaluate(run(seq, config)); }

std::string to_json(const MetricsReport& r) {
  return "{\"sf\":" + format_double(r.sf) + ",\"mm\":" + format_double(r.mm) + ",\"cov\":" + format_double(r.cov) +
         "}\n";
}

namespace {

std::vector<double> histogram(std::span<const double> xs, double lo, double width, int bins) {
  constexpr double kSmoothing = 1e-6;
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double x : xs) {
    int k = static_cast<int>(std::floor((x - lo) / width));
    k = std::clamp(k, 0, bins - 1);
    h[static_cast<std::size_t>(k)] += 1.0;
  }
  const double n = static_cast<double>(xs.size());
  double total = 0.0;
  for (double& v : h) {
    v = v / n + kSmoothing;
    total += v;
  }
  for (double& v : h) v /= total;
  return h;
}

}  // namespace

double js_divergence(std::span<const double> a, std::span<const double> b, int bins) {
  if (a.empty() || b.empty()) throw ValidationError("js_divergence: samples must be non-empty");
  if (bins < 1) throw ValidationError("js_divergence: bins must be positive");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin), hi = std::max(*amax, *bmax);
  if (!(hi > lo)) return 0.0;
  const double width = (hi - lo) / bins;
  const auto p = histogram(a, lo, width, bins);
  const auto q = histogram(b, lo, width, bins);
  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    kl_p += p[i] * std::log(p[i] / m);
    kl_q += q[i] * std::log(q[i] / m);
  }
  const double js = 0.5 * (kl_p + kl_q);
  return std::clamp(js, 0.0, std::log(2.0));
}

SampleStats sample_stats(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace danmaku
