#include "critesn/transfer.hpp"

#include "critesn/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <stdexcept>

namespace critesn {

// EcpList ------------------------------------------------------------------

EcpList::EcpList()
  : points_{0.0}
{
}

EcpList::EcpList(std::vector<double> points)
  : points_{std::move(points)}
{
    for (double p : points_)
        if (!std::isfinite(p)) throw std::invalid_argument("ECP values must be finite");
    if (std::find(points_.begin(), points_.end(), 0.0) == points_.end()) points_.push_back(0.0);
    std::sort(points_.begin(), points_.end());
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (points_[i] - points_[i - 1] < min_ecp_spacing)
            throw std::invalid_argument(fmt::format(
              "ECPs {} and {} are closer than {}", points_[i - 1], points_[i], min_ecp_spacing));
    }
}

std::string EcpList::to_string() const
{
    return join_numbers(points_);
}

EcpList EcpList::parse(std::string_view text)
{
    return EcpList{parse_number_list(text)};
}

std::string_view to_string(TransferVariant v) noexcept
{
    return v == TransferVariant::Plateau ? "plateau" : "bridge";
}

TransferVariant parse_variant(std::string_view text)
{
    if (text == "plateau") return TransferVariant::Plateau;
    if (text == "bridge") return TransferVariant::Bridge;
    throw std::invalid_argument(fmt::format("unknown transfer variant '{}'", text));
}

// Pieces -------------------------------------------------------------------

double sech2(double z) noexcept
{
    const double e = std::exp(-2.0 * std::abs(z));
    return std::min(1.0, 4.0 * e / ((1.0 + e) * (1.0 + e)));
}

double ecp_branch(double p, double x) noexcept
{
    return std::tanh(x - p) + std::tanh(p);
}

double TransferPiece::value(double x) const noexcept
{
    if (scale == 0.0) return level;
    return level + scale * std::tanh((x - anchor) / scale);
}

double TransferPiece::slope(double x) const noexcept
{
    if (scale == 0.0) return 0.0;
    return sech2((x - anchor) / scale);
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Largest tanh((x - anchor) / scale) argument reached by a bridge before its slope
// would underflow to zero.
constexpr double max_bridge_ratio = 350.0;

/// Solves tanh(z) / z == rho for z > 0, rho in (0, 1). tanh(z)/z decreases from 1 to 0.
double solve_tanh_ratio(double rho)
{
    double lo = 0.0;
    double hi = 1.0 / rho + 1.0;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (std::tanh(mid) / mid > rho)
            lo = mid;
        else
            hi = mid;
    }
    // Both ends are within one ulp; keep the one with the smaller residual.
    const auto residual = [rho](double z) { return z == 0.0 ? 1.0 - rho : std::tanh(z) / z - rho; };
    return std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
}

void append_segment(std::vector<TransferPiece>& pieces, double a, double b, TransferVariant variant)
{
    const double ha = std::tanh(a);
    const double hb = std::tanh(b);
    const double rise = hb - ha;
    const double width = b - a;
    if (!(rise > 0.0) || !(rise < width))
        throw std::invalid_argument(
          fmt::format("ECP segment [{}, {}] is numerically flat; tanh values cannot be separated", a, b));

    if (variant == TransferVariant::Plateau) {
        // Follow the left branch up to the mid level c, stay flat, then pick up the right
        // branch where it reaches c. Both branches hit c at the same distance from their ECP.
        const double half_rise = 0.5 * rise;
        const double reach = std::atanh(half_rise);
        const double x1 = a + reach;
        const double x2 = b - reach;
        if (!(a < x1 && x1 <= x2 && x2 < b))
            throw std::logic_error(fmt::format("plateau construction failed on [{}, {}]", a, b));
        pieces.push_back({a, a, ha, 1.0});
        if (x1 < x2) pieces.push_back({x1, x1, ha + half_rise, 0.0});
        pieces.push_back({x2, b, hb, 1.0});
        return;
    }

    // Bridge: level + kappa * tanh((x - anchor) / kappa) from each ECP towards the midpoint.
    // The two halves are point symmetric around the segment center, so they join with
    // equal slope once kappa * tanh(width / (2 kappa)) == rise / 2.
    const double z = solve_tanh_ratio(rise / width);
    if (!(z > 0.0) || z > max_bridge_ratio)
        throw std::invalid_argument(
          fmt::format("ECP segment [{}, {}] is too flat for a positive-slope bridge", a, b));
    const double kappa = 0.5 * width / z;
    const double mid = a + 0.5 * width;
    const double jump = rise - 2.0 * kappa * std::tanh(0.5 * width / kappa);
    if (std::abs(jump) > 1e-13)
        throw std::logic_error(fmt::format("bridge solve on [{}, {}] left residual {}", a, b, jump));
    pieces.push_back({a, a, ha, kappa});
    pieces.push_back({mid, b, hb, kappa});
}

}  // namespace

// MorphableTransfer --------------------------------------------------------

MorphableTransfer::MorphableTransfer(EcpList ecps, TransferVariant variant)
  : ecps_{std::move(ecps)}
  , variant_{variant}
{
    const auto& p = ecps_.points();
    pieces_.push_back({-inf, p.front(), std::tanh(p.front()), 1.0});
    for (std::size_t i = 0; i + 1 < p.size(); ++i) append_segment(pieces_, p[i], p[i + 1], variant_);
    if (p.size() > 1) pieces_.push_back({p.back(), p.back(), std::tanh(p.back()), 1.0});
}

MorphableTransfer MorphableTransfer::tanh()
{
    return MorphableTransfer{EcpList{}, TransferVariant::Bridge};
}

const TransferPiece& MorphableTransfer::piece_at(double x) const noexcept
{
    const auto it = std::upper_bound(
      pieces_.begin() + 1, pieces_.end(), x, [](double v, const TransferPiece& pc) { return v < pc.lo; });
    return *(it - 1);
}

std::vector<double> MorphableTransfer::breakpoints() const
{
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo);
    return out;
}

std::vector<TransferSample> MorphableTransfer::sample(double lo, double hi, std::size_t n) const
{
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument(fmt::format("invalid sample range [{}, {}]", lo, hi));
    if (n < 2) throw std::invalid_argument("sample needs at least 2 points");
    std::vector<TransferSample> rows;
    rows.reserve(n);
    const double span = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i + 1 == n ? hi : lo + span * static_cast<double>(i) / static_cast<double>(n - 1);
        rows.push_back({x, eval(x), slope(x)});
    }
    return rows;
}

std::string samples_to_csv(std::span<const TransferSample> rows)
{
    std::string out = "x,theta,slope\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{}\n", format_number(r.x), format_number(r.theta), format_number(r.slope));
    return out;
}

// Validation ---------------------------------------------------------------

namespace {

constexpr double continuity_tol = 1e-12;
constexpr double fd_tol = 1e-6;
// Rounding slack for the grid monotonicity and Lipschitz checks.
constexpr double order_slack = 1e-14;

}  // namespace

ValidationReport validate(const MorphableTransfer& f, double grid_step)
{
    if (!(grid_step > 0.0 && grid_step <= 1e-2))
        throw std::invalid_argument(fmt::format("grid step {} outside (0, 1e-2]", grid_step));

    ValidationReport report;
    auto flag = [&report](std::string what, double x, double value) {
        report.violations.push_back({std::move(what), x, value});
    };

    const auto& ecps = f.ecps().points();
    const auto pieces = f.pieces();
    const bool bridge = f.variant() == TransferVariant::Bridge;
    const double bound = 1.0 + std::max(std::abs(std::tanh(ecps.front())), std::abs(std::tanh(ecps.back())));

    for (double p : ecps) {
        if (f.eval(p) != std::tanh(p)) flag("anchor value differs from tanh", p, f.eval(p));
        if (f.slope(p) != 1.0) flag("slope at ECP is not 1", p, f.slope(p));
    }

    for (std::size_t i = 1; i < pieces.size(); ++i) {
        const double b = pieces[i].lo;
        const double gap = std::abs(pieces[i - 1].value(b) - pieces[i].value(b));
        if (gap > continuity_tol) flag("discontinuity at piece boundary", b, gap);
    }

    auto near_ecp = [&ecps](double x, double radius) {
        const auto it = std::lower_bound(ecps.begin(), ecps.end(), x);
        if (it != ecps.end() && *it - x <= radius) return true;
        return it != ecps.begin() && x - *(it - 1) <= radius;
    };

    auto piece_index = [&pieces](double x) {
        const auto it = std::upper_bound(
          pieces.begin() + 1, pieces.end(), x, [](double v, const TransferPiece& pc) { return v < pc.lo; });
        return static_cast<std::size_t>(it - pieces.begin()) - 1;
    };

    const double lo = ecps.front() - 5.0;
    const double hi = ecps.back() + 5.0;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / grid_step)) + 1;

    double prev_x = 0.0;
    double prev_v = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
        const double x = j == n ? hi : lo + grid_step * static_cast<double>(j);
        if (j == n && x <= prev_x) break;
        const double v = f.eval(x);
        const double s = f.slope(x);
        ++report.points_checked;

        if (!(s >= 0.0 && s <= 1.0)) flag("slope outside [0, 1]", x, s);
        if (s >= 1.0 && !near_ecp(x, grid_step)) flag("unit slope away from ECPs", x, s);
        if (bridge && x > ecps.front() && x < ecps.back() && !(s > 0.0)) flag("zero slope inside bridge", x, s);
        if (!(std::abs(v) <= bound)) flag("value exceeds saturation bound", x, v);

        if (j > 0) {
            const double rise = v - prev_v;
            if (rise < -order_slack) flag("decreasing", x, rise);
            if (rise > (x - prev_x) + order_slack) flag("Lipschitz constant above 1", x, rise);
        }
        prev_x = x;
        prev_v = v;

        // Five-point finite difference inside the active piece only.
        const std::size_t k = piece_index(x);
        const auto& pc = pieces[k];
        const double h = pc.scale > 0.0 ? std::min(1e-5, 0.01 * pc.scale) : 1e-5;
        const double next_lo = k + 1 < pieces.size() ? pieces[k + 1].lo : inf;
        if (x - 2.0 * h > pc.lo && x + 2.0 * h < next_lo) {
            const double fd = (f.eval(x - 2.0 * h) - 8.0 * f.eval(x - h) + 8.0 * f.eval(x + h) - f.eval(x + 2.0 * h))
                              / (12.0 * h);
            if (std::abs(fd - s) > fd_tol) flag("finite-difference slope mismatch", x, fd - s);
        }
    }
    return report;
}

}  // namespace critesn
