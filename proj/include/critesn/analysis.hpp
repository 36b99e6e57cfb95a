#pragma once

// Lyapunov exponents, the critical tanh network, and forgetting-curve fits. //

#include "critesn/reservoir.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace critesn {

enum class LyapunovMethod { Renormalized, DerivativeProduct };

std::string_view to_string(LyapunovMethod m) noexcept;

struct LyapunovEstimate {
    double lambda = 0.0;  ///< nats per step
    LyapunovMethod method = LyapunovMethod::Renormalized;
    std::size_t steps_used = 0;
    std::size_t washout = 0;
    double d0 = 0.0;         ///< 0 for the derivative product
    double std_error = 0.0;  ///< batch-mean standard error
};

inline constexpr double default_d0 = 1e-9;
inline constexpr std::size_t default_washout = 1000;
inline constexpr std::size_t default_horizon = 100000;
inline constexpr std::size_t min_lyapunov_steps = 1000;
inline constexpr std::size_t lyapunov_batches = 20;

/// Two-trajectory estimate with per-step renormalization of the companion back to
/// distance d0. The reservoir's current state is the reference start; the companion
/// starts d0 away along a random unit direction drawn from `seed`.
///
/// Throws std::invalid_argument when input.size() < washout + 1000 or d0 is
/// outside [1e-12, 1e-6]. A companion that collapses exactly onto the reference
/// contributes log(0) and yields lambda = -inf.
LyapunovEstimate lyapunov_renormalized(
  Reservoir r,
  std::span<const double> input,
  double d0 = default_d0,
  std::size_t washout = default_washout,
  std::uint64_t seed = 0);

/// Mean of log|W * theta'(y_lin)| along the trajectory of a one-neuron reservoir.
/// Throws std::invalid_argument for k != 1 or a too short input.
LyapunovEstimate lyapunov_derivative_product(
  Reservoir r, std::span<const double> input, std::size_t washout = default_washout);

/// Period-2 orbit of x_t = tanh(-b x_{t-1} + u_t) under u_t = +-amplitude whose
/// per-step tangent has unit magnitude.
struct CriticalPoint {
    double b_star = 0.0;
    double s_star = 0.0;
    double residual_orbit = 0.0;    ///< tanh(b s - A) - s
    double residual_tangent = 0.0;  ///< b (1 - s^2) - 1
};

/// Eliminates b = 1 / (1 - s^2) and bisects s = tanh(b s - amplitude) on (0, 1).
/// Throws std::invalid_argument for amplitude <= 0 and std::domain_error when no
/// root can be bracketed in double precision.
CriticalPoint solve_critical_b(double amplitude);

/// Points with d_t below this are treated as floating-point floor.
inline constexpr double distance_floor = 1e-13;
inline constexpr std::size_t min_fit_points = 30;
/// Leading steps treated as transient by classify_decay.
inline constexpr std::size_t transient_steps = 10;
inline constexpr double classify_margin = 0.02;

struct PowerLawFit {
    double c_a = 0.0;  ///< decay exponent, d ~ t^-c_a
    double r2 = 0.0;
    std::size_t points = 0;
};

struct ExponentialFit {
    double c_b = 0.0;  ///< per-step base, d ~ c_b^t
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least squares of log d against log t over t in [t_lo, t_hi] (t >= 1, d > 1e-13).
/// Throws std::invalid_argument with fewer than 30 usable points.
PowerLawFit fit_power_law(const DistanceSeries& series, std::pair<double, double> window);

/// Least squares of log d against t over the same point selection.
ExponentialFit fit_exponential(const DistanceSeries& series, std::pair<double, double> window);

/// Mean second derivative of log d with respect to log t, estimated on
/// logarithmically spaced samples (10 per decade) of the usable points.
/// Negative when the log-log curve bends down. NaN with fewer than 3 samples.
double loglog_curvature(const DistanceSeries& series, std::pair<double, double> window);

enum class DecayLaw { PowerLaw, Exponential, Inconclusive };

std::string_view to_string(DecayLaw law) noexcept;

struct DecayFit {
    DecayLaw law = DecayLaw::Inconclusive;
    std::optional<double> c_a;
    std::optional<double> c_b;
    double r2_loglog = 0.0;
    double r2_semilog = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    std::optional<std::size_t> truncated_at;
    double curvature = 0.0;  ///< loglog_curvature over the window, NaN if unavailable
};

/// Fits both laws on t > 10 with d > 1e-13 and keeps the one whose r^2 is larger by
/// more than 0.02; otherwise (or with fewer than 30 usable points) Inconclusive.
DecayFit classify_decay(const DistanceSeries& series);

/// Header plus one row each; column sets are fixed.
std::string lyapunov_csv_header();
std::string lyapunov_csv_row(const LyapunovEstimate& e);
std::string decay_csv_header();
std::string decay_csv_row(const DecayFit& f);

/// Human readable multi-line summaries.
std::string describe(const LyapunovEstimate& e);
std::string describe(const DecayFit& f);
std::string describe(const CriticalPoint& c, double amplitude);

}  // namespace critesn
