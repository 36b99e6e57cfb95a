#include "critesn/analysis.hpp"

#include "critesn/csv.hpp"
#include "critesn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace critesn {

std::string_view to_string(LyapunovMethod m) noexcept
{
    return m == LyapunovMethod::Renormalized ? "renormalized" : "derivative-product";
}

std::string_view to_string(DecayLaw law) noexcept
{
    switch (law) {
    case DecayLaw::PowerLaw: return "power-law";
    case DecayLaw::Exponential: return "exponential";
    case DecayLaw::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

void require_length(std::span<const double> input, std::size_t washout)
{
    if (input.size() < washout + min_lyapunov_steps)
        throw std::invalid_argument(fmt::format(
          "input of {} steps is shorter than washout {} + {}", input.size(), washout, min_lyapunov_steps));
}

/// Mean and batch-mean standard error of per-step log rates.
std::pair<double, double> mean_and_batch_error(const std::vector<double>& logs)
{
    const std::size_t n = logs.size();
    const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(n);
    if (!std::isfinite(mean)) return {mean, std::numeric_limits<double>::quiet_NaN()};
    std::vector<double> batch(lyapunov_batches, 0.0);
    for (std::size_t b = 0; b < lyapunov_batches; ++b) {
        const std::size_t lo = b * n / lyapunov_batches;
        const std::size_t hi = (b + 1) * n / lyapunov_batches;
        batch[b] = std::accumulate(logs.begin() + static_cast<std::ptrdiff_t>(lo),
                                   logs.begin() + static_cast<std::ptrdiff_t>(hi), 0.0)
                   / static_cast<double>(hi - lo);
    }
    const double bm = std::accumulate(batch.begin(), batch.end(), 0.0) / static_cast<double>(lyapunov_batches);
    double ss = 0.0;
    for (double v : batch) ss += (v - bm) * (v - bm);
    const auto nb = static_cast<double>(lyapunov_batches);
    return {mean, std::sqrt(ss / (nb - 1.0)) / std::sqrt(nb)};
}

}  // namespace

LyapunovEstimate lyapunov_renormalized(
  Reservoir r, std::span<const double> input, double d0, std::size_t washout, std::uint64_t seed)
{
    require_length(input, washout);
    if (!(d0 >= 1e-12 && d0 <= 1e-6)) throw std::invalid_argument(fmt::format("d0 = {} outside [1e-12, 1e-6]", d0));

    const auto k = static_cast<Eigen::Index>(r.k());
    Rng rng{seed, stream::direction};
    Vector direction(k);
    double norm = 0.0;
    while (norm < 1e-6) {
        for (Eigen::Index i = 0; i < k; ++i) direction(i) = rng.normal();
        norm = direction.norm();
    }
    direction /= norm;

    Vector companion = r.state() + d0 * direction;
    std::vector<double> logs;
    logs.reserve(input.size() - washout);
    for (std::size_t i = 0; i < input.size(); ++i) {
        r.step(input[i], i);
        companion = r.propagate(companion, input[i]);
        Vector diff = companion - r.state();
        const double d = diff.norm();
        if (i >= washout) logs.push_back(std::log(d / d0));
        if (d > 0.0) {
            direction = diff / d;
        }
        companion = r.state() + d0 * direction;
    }

    LyapunovEstimate e;
    e.method = LyapunovMethod::Renormalized;
    e.steps_used = logs.size();
    e.washout = washout;
    e.d0 = d0;
    std::tie(e.lambda, e.std_error) = mean_and_batch_error(logs);
    return e;
}

LyapunovEstimate lyapunov_derivative_product(Reservoir r, std::span<const double> input, std::size_t washout)
{
    if (r.k() != 1) throw std::invalid_argument("derivative product estimator needs a one-neuron reservoir");
    require_length(input, washout);
    const double w = r.w()(0, 0);
    std::vector<double> logs;
    logs.reserve(input.size() - washout);
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto rec = r.step(input[i], i);
        if (i >= washout) logs.push_back(std::log(std::abs(w * rec.slope(0))));
    }
    LyapunovEstimate e;
    e.method = LyapunovMethod::DerivativeProduct;
    e.steps_used = logs.size();
    e.washout = washout;
    std::tie(e.lambda, e.std_error) = mean_and_batch_error(logs);
    return e;
}

// Critical point -----------------------------------------------------------

CriticalPoint solve_critical_b(double amplitude)
{
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw std::invalid_argument("amplitude must be positive and finite");

    // With b = 1 / (1 - s^2) the orbit condition becomes F(s) = tanh(s / (1 - s^2) - A) - s.
    const auto residual = [amplitude](double s) { return std::tanh(s / (1.0 - s * s) - amplitude) - s; };

    // Scan (0, 1) on a uniform grid refined geometrically towards 1.
    std::vector<double> grid;
    for (int j = 1; j < 4096; ++j) grid.push_back(j / 4096.0);
    for (int e = 13; e <= 52; ++e) grid.push_back(1.0 - std::ldexp(1.0, -e));

    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (residual(grid[i]) < 0.0 && residual(grid[i + 1]) >= 0.0) {
            lo = grid[i];
            hi = grid[i + 1];
            bracketed = true;
            break;
        }
    }
    if (!bracketed)
        throw std::domain_error(fmt::format("no critical orbit can be bracketed for amplitude {}", amplitude));

    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double s = std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;

    CriticalPoint c;
    c.s_star = s;
    c.b_star = 1.0 / (1.0 - s * s);
    c.residual_orbit = std::tanh(c.b_star * s - amplitude) - s;
    c.residual_tangent = c.b_star * (1.0 - s * s) - 1.0;
    return c;
}

// Fits ---------------------------------------------------------------------

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct Selection {
    std::vector<double> t;
    std::vector<double> log_d;
};

Selection select_points(const DistanceSeries& series, std::pair<double, double> window)
{
    Selection s;
    const double lo = std::max(1.0, window.first);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto t = static_cast<double>(series.t[i]);
        const double d = series.d[i];
        if (t < lo || t > window.second) continue;
        if (!(d > distance_floor) || !std::isfinite(d)) continue;
        s.t.push_back(t);
        s.log_d.push_back(std::log(d));
    }
    return s;
}

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return f;
}

void require_points(const Selection& s)
{
    if (s.t.size() < min_fit_points)
        throw std::invalid_argument(
          fmt::format("only {} usable points in the fit window, need {}", s.t.size(), min_fit_points));
}

}  // namespace

PowerLawFit fit_power_law(const DistanceSeries& series, std::pair<double, double> window)
{
    auto s = select_points(series, window);
    require_points(s);
    std::vector<double> log_t(s.t.size());
    std::transform(s.t.begin(), s.t.end(), log_t.begin(), [](double t) { return std::log(t); });
    const auto f = least_squares(log_t, s.log_d);
    return {-f.slope, f.r2, s.t.size()};
}

ExponentialFit fit_exponential(const DistanceSeries& series, std::pair<double, double> window)
{
    auto s = select_points(series, window);
    require_points(s);
    const auto f = least_squares(s.t, s.log_d);
    return {std::exp(f.slope), f.r2, s.t.size()};
}

double loglog_curvature(const DistanceSeries& series, std::pair<double, double> window)
{
    const auto s = select_points(series, window);
    std::vector<double> x;
    std::vector<double> y;
    if (!s.t.empty()) {
        const double first = std::log10(s.t.front());
        const double last = std::log10(s.t.back());
        for (int j = static_cast<int>(std::floor(first * 10.0)); j <= static_cast<int>(std::ceil(last * 10.0)); ++j) {
            const double target = std::pow(10.0, j / 10.0);
            const auto it = std::lower_bound(s.t.begin(), s.t.end(), target);
            if (it == s.t.end()) break;
            const double lt = std::log(*it);
            if (!x.empty() && lt <= x.back()) continue;
            x.push_back(lt);
            y.push_back(s.log_d[static_cast<std::size_t>(it - s.t.begin())]);
        }
    }
    if (x.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double right = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        const double left = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        sum += 2.0 * (right - left) / (x[i + 1] - x[i - 1]);
    }
    return sum / static_cast<double>(x.size() - 2);
}

DecayFit classify_decay(const DistanceSeries& series)
{
    DecayFit out;
    out.truncated_at = series.truncated_at;
    const double t_hi = series.size() > 0 ? static_cast<double>(series.t.back()) : 0.0;
    out.window = {static_cast<double>(transient_steps + 1), t_hi};
    out.curvature = loglog_curvature(series, out.window);

    const auto usable = select_points(series, out.window);
    if (usable.t.size() < min_fit_points) return out;

    const auto power = fit_power_law(series, out.window);
    const auto expo = fit_exponential(series, out.window);
    out.r2_loglog = power.r2;
    out.r2_semilog = expo.r2;
    if (power.r2 > expo.r2 + classify_margin) {
        out.law = DecayLaw::PowerLaw;
        out.c_a = power.c_a;
    } else if (expo.r2 > power.r2 + classify_margin) {
        out.law = DecayLaw::Exponential;
        out.c_b = expo.c_b;
    }
    return out;
}

// Serialization ------------------------------------------------------------

std::string lyapunov_csv_header()
{
    return "method,lambda,stderr,steps_used,washout,d0";
}

std::string lyapunov_csv_row(const LyapunovEstimate& e)
{
    return fmt::format("{},{},{},{},{},{}",
                       to_string(e.method),
                       format_number(e.lambda),
                       format_number(e.std_error),
                       e.steps_used,
                       e.washout,
                       format_number(e.d0));
}

std::string decay_csv_header()
{
    return "law,c_a,c_b,r2_loglog,r2_semilog,t_lo,t_hi,truncated_at,curvature";
}

std::string decay_csv_row(const DecayFit& f)
{
    const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; };
    return fmt::format("{},{},{},{},{},{},{},{},{}",
                       to_string(f.law),
                       opt(f.c_a),
                       opt(f.c_b),
                       format_number(f.r2_loglog),
                       format_number(f.r2_semilog),
                       format_number(f.window.first),
                       format_number(f.window.second),
                       f.truncated_at ? std::to_string(*f.truncated_at) : std::string{},
                       format_number(f.curvature));
}

std::string describe(const LyapunovEstimate& e)
{
    std::string out = fmt::format("Lyapunov exponent ({})\n", to_string(e.method));
    out += fmt::format("  lambda     = {:.6g} nats/step\n", e.lambda);
    out += fmt::format("  std error  = {:.3g}\n", e.std_error);
    out += fmt::format("  steps used = {} (washout {})\n", e.steps_used, e.washout);
    if (e.method == LyapunovMethod::Renormalized) out += fmt::format("  d0         = {:.3g}\n", e.d0);
    return out;
}

std::string describe(const DecayFit& f)
{
    std::string out = fmt::format("Decay law: {}\n", to_string(f.law));
    if (f.c_a) out += fmt::format("  c_a (power-law exponent) = {:.6g}\n", *f.c_a);
    if (f.c_b) out += fmt::format("  c_b (exponential base)   = {:.6g}\n", *f.c_b);
    out += fmt::format("  r2 log-log  = {:.6f}\n", f.r2_loglog);
    out += fmt::format("  r2 semi-log = {:.6f}\n", f.r2_semilog);
    out += fmt::format("  window      = [{}, {}]\n", f.window.first, f.window.second);
    out += fmt::format("  log-log curvature = {:.6g}\n", f.curvature);
    if (f.truncated_at) out += fmt::format("  distance reached exactly zero at step {}\n", *f.truncated_at);
    return out;
}

std::string describe(const CriticalPoint& c, double amplitude)
{
    std::string out = fmt::format("Critical tanh network for input amplitude {:.17g}\n", amplitude);
    out += fmt::format("  b*  = {:.17g}\n", c.b_star);
    out += fmt::format("  s*  = {:.17g}\n", c.s_star);
    out += fmt::format("  orbit residual   tanh(b* s* - A) - s* = {:.3e}\n", c.residual_orbit);
    out += fmt::format("  tangent residual b* (1 - s*^2) - 1     = {:.3e}\n", c.residual_tangent);
    return out;
}

}  // namespace critesn
