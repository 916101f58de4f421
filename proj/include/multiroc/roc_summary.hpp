#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "multiroc/factorizer.hpp"

namespace multiroc {

struct RocPoint {
    double x = 0.0;  // FPR-like
    double y = 0.0;  // TPR-like
    bool operator==(const RocPoint&) const = default;
};

// Multiclass ROC curve traced by the logistic-transformed centered threshold
// effects, sorted by x and closed with the (0,0) and (1,1) corners.
struct RocCurve {
    std::vector<RocPoint> points;
    std::vector<double> source_thresholds;
    // True when sorting by x changed the threshold order of interior points.
    bool reordered = false;
};

struct DStatistic {
    double value = 0.0;
};

RocCurve curve(const CenteredComponents& centered, std::span<const double> levels = {});
RocCurve curve(std::span<const double> lambda0_tp, std::span<const double> lambda0_fp,
               std::span<const double> levels = {});

// Trapezoidal area under the curve.
DStatistic d_statistic(const RocCurve& curve);
double trapezoid_area(std::span<const RocPoint> points);

// Piecewise-linear y at `x` (vertical segments resolve to their top).
double interpolate(const RocCurve& curve, double x);

void write_curve_csv(std::ostream& out, const RocCurve& curve);
void write_curve_json(std::ostream& out, const RocCurve& curve, double d);
// Self-contained 600×600 SVG with the diagonal reference and optional band.
struct Band;
std::string curve_svg(const RocCurve& curve, double d, const Band* band = nullptr);

// "D = 0.8123"
std::string format_d(double d);

}  // namespace multiroc
