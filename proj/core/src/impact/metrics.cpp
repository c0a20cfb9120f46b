#include "advprobe/impact/metrics.hpp"

#include <stdexcept>

#include "advprobe/common/error.hpp"

namespace advprobe::impact {

const char* property_name(Property p) {
  switch (p) {
    case Property::Win: return "win";
    case Property::RedCount: return "red_count";
    case Property::BlueCount: return "blue_count";
    case Property::TrajectoryLength: return "trajectory_length";
  }
  return "";
}

Property parse_property(const std::string& name) {
  for (Property p : kAllProperties)
    if (name == property_name(p)) return p;
  throw ConfigError("unknown property '" + name + "'");
}

const char* metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::Difference: return "difference";
    case MetricKind::Indicator: return "indicator";
    case MetricKind::Threshold: return "threshold";
  }
  return "";
}

MetricKind parse_metric(const std::string& name) {
  for (MetricKind m : {MetricKind::Difference, MetricKind::Indicator, MetricKind::Threshold})
    if (name == metric_name(m)) return m;
  throw ConfigError("unknown metric '" + name + "'");
}

double property_value(const env::PropertyLog& log, Property p) {
  switch (p) {
    case Property::Win: return log.win == env::Outcome::Win ? 1.0 : 0.0;
    case Property::RedCount: return log.red_count;
    case Property::BlueCount: return log.blue_count;
    case Property::TrajectoryLength: return log.trajectory_length;
  }
  return 0.0;
}

double impact_difference(double attacked, double unattacked) { return attacked - unattacked; }

int impact_indicator(double attacked, double unattacked) {
  return attacked != unattacked ? 1 : 0;
}

int impact_threshold(double attacked, double unattacked, const Distance& d, double d_star) {
  if (!(d_star >= 0.0)) throw std::invalid_argument("threshold d* must be >= 0");
  return d(attacked, unattacked) > d_star ? 1 : 0;
}

double Metric::operator()(double attacked, double unattacked) const {
  switch (kind) {
    case MetricKind::Difference: return impact_difference(attacked, unattacked);
    case MetricKind::Indicator: return impact_indicator(attacked, unattacked);
    case MetricKind::Threshold: return impact_threshold(attacked, unattacked, distance, d_star);
  }
  return 0.0;
}

Metric default_metric(Property p) {
  Metric m;
  m.kind = p == Property::Win ? MetricKind::Indicator : MetricKind::Difference;
  return m;
}

double estimate_expected_impact(std::span<const double> attacked,
                                std::span<const double> unattacked, const Metric& metric) {
  if (attacked.empty() || unattacked.empty())
    throw std::invalid_argument("expected impact needs non-empty attacked and unattacked lists");
  double sum = 0.0;
  for (double a : attacked)
    for (double u : unattacked) sum += metric(a, u);
  return sum / (static_cast<double>(attacked.size()) * static_cast<double>(unattacked.size()));
}

double expected_value(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("expected value of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace advprobe::impact
