#include "multiroc/roc_summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "multiroc/errors.hpp"
#include "multiroc/uncertainty.hpp"

namespace multiroc {

RocCurve curve(std::span<const double> lambda0_tp, std::span<const double> lambda0_fp,
               std::span<const double> levels) {
    if (lambda0_tp.size() != lambda0_fp.size()) {
        throw DimensionMismatch("TPR and FPR threshold effects differ in length");
    }
    RocCurve out;
    out.source_thresholds.assign(levels.begin(), levels.end());
    std::vector<RocPoint> interior;
    interior.reserve(lambda0_tp.size());
    for (std::size_t t = 0; t < lambda0_tp.size(); ++t) {
        interior.push_back({logistic(lambda0_fp[t]), logistic(lambda0_tp[t])});
    }
    auto by_xy = [](const RocPoint& a, const RocPoint& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); };
    // Rows run from high to low threshold, so x normally increases already.
    if (!std::is_sorted(interior.begin(), interior.end(), by_xy)) {
        out.reordered = true;
        std::stable_sort(interior.begin(), interior.end(), by_xy);
    }
    out.points.reserve(interior.size() + 2);
    out.points.push_back({0.0, 0.0});
    out.points.insert(out.points.end(), interior.begin(), interior.end());
    out.points.push_back({1.0, 1.0});
    return out;
}

RocCurve curve(const CenteredComponents& centered, std::span<const double> levels) {
    return curve(centered.lambda0_tp, centered.lambda0_fp, levels);
}

double trapezoid_area(std::span<const RocPoint> points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y) * 0.5;
    }
    return area;
}

DStatistic d_statistic(const RocCurve& c) {
    return {std::clamp(trapezoid_area(c.points), 0.0, 1.0)};
}

double interpolate(const RocCurve& c, double x) {
    const auto& p = c.points;
    if (p.empty()) return 0.0;
    if (x <= p.front().x) return p.front().y;
    // Last point with p.x <= x; on vertical runs that is the highest one.
    std::size_t hi = 0;
    while (hi + 1 < p.size() && p[hi + 1].x <= x) ++hi;
    if (hi + 1 == p.size()) return p.back().y;
    const auto& a = p[hi];
    const auto& b = p[hi + 1];
    const double t = (x - a.x) / (b.x - a.x);
    return a.y + t * (b.y - a.y);
}

void write_curve_csv(std::ostream& out, const RocCurve& c) {
    out << "x,y\n";
    for (const auto& p : c.points) out << format_real(p.x) << ',' << format_real(p.y) << '\n';
}

void write_curve_json(std::ostream& out, const RocCurve& c, double d) {
    nlohmann::json doc;
    doc["D"] = d;
    auto pts = nlohmann::json::array();
    for (const auto& p : c.points) pts.push_back({p.x, p.y});
    doc["points"] = pts;
    doc["source_thresholds"] = c.source_thresholds;
    out << doc.dump(1) << '\n';
}

std::string format_d(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "D = %.4f", d);
    return buf;
}

namespace {

constexpr double kSize = 600.0;
constexpr double kMargin = 60.0;
constexpr double kPlot = kSize - 2 * kMargin;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}
std::string px(double x) { return fmt(kMargin + x * kPlot); }
std::string py(double y) { return fmt(kSize - kMargin - y * kPlot); }

}  // namespace

std::string curve_svg(const RocCurve& c, double d, const Band* band) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 600 600\" width=\"600\" height=\"600\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"600\" height=\"600\" fill=\"white\"/>\n";
    s << "<rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << fmt(kPlot) << "\" height=\"" << fmt(kPlot)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        s << "<text x=\"" << px(v) << "\" y=\"" << fmt(kSize - kMargin + 18)
          << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
        s << "<text x=\"" << fmt(kMargin - 8) << "\" y=\"" << py(v) << "\" font-size=\"12\" text-anchor=\"end\">"
          << fmt(v) << "</text>\n";
    }
    s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    if (band && !band->x.empty()) {
        s << "<polygon fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < band->x.size(); ++i) s << px(band->x[i]) << ',' << py(band->upper[i]) << ' ';
        for (std::size_t i = band->x.size(); i-- > 0;) s << px(band->x[i]) << ',' << py(band->lower[i]) << ' ';
        s << "\"/>\n";
    }
    s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : c.points) s << px(p.x) << ',' << py(p.y) << ' ';
    s << "\"/>\n";
    s << "<text x=\"300\" y=\"" << fmt(kSize - 15) << "\" font-size=\"14\" text-anchor=\"middle\">FPR-like</text>\n";
    s << "<text x=\"18\" y=\"300\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 300)\">"
         "TPR-like</text>\n";
    s << "<text x=\"" << px(0.6) << "\" y=\"" << py(0.1) << "\" font-size=\"14\">" << format_d(d) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace multiroc
