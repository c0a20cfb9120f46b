#pragma once

#include <functional>
#include <span>
#include <string>

#include "advprobe/env/cyberstrike.hpp"

namespace advprobe::impact {

enum class Property { Win, RedCount, BlueCount, TrajectoryLength };
enum class MetricKind { Difference, Indicator, Threshold };

inline constexpr Property kAllProperties[] = {Property::Win, Property::RedCount,
                                              Property::BlueCount,
                                              Property::TrajectoryLength};

const char* property_name(Property p);
/// Throws ConfigError on an unknown name.
Property parse_property(const std::string& name);
const char* metric_name(MetricKind m);
MetricKind parse_metric(const std::string& name);

/// Scalar view of a property; the win flag maps to 1 (win) or 0.
double property_value(const env::PropertyLog& log, Property p);

using Distance = std::function<double(double, double)>;

inline double absolute_distance(double a, double b) { return a > b ? a - b : b - a; }
/// 0 for equal values, 1 otherwise.
inline double discrete_distance(double a, double b) { return a == b ? 0.0 : 1.0; }

double impact_difference(double attacked, double unattacked);
int impact_indicator(double attacked, double unattacked);
/// 1 iff d(attacked, unattacked) > d_star. Throws std::invalid_argument for
/// a negative d_star.
int impact_threshold(double attacked, double unattacked, const Distance& d, double d_star);

/// A fully specified impact metric D(p', p).
struct Metric {
  MetricKind kind = MetricKind::Difference;
  double d_star = 0.0;
  Distance distance = absolute_distance;

  double operator()(double attacked, double unattacked) const;
};

/// Indicator for the win flag, difference for the numeric properties.
Metric default_metric(Property p);

/// (1 / |A||U|) sum_a sum_u D(a, u), including repeated elements. Throws
/// std::invalid_argument when either list is empty.
double estimate_expected_impact(std::span<const double> attacked,
                                std::span<const double> unattacked, const Metric& metric);

/// Plain mean of one list of property outcomes. Throws on an empty list.
double expected_value(std::span<const double> values);

}  // namespace advprobe::impact
