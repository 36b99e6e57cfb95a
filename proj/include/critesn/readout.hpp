#pragma once

// Linear regression readout over reservoir states. //

#include "critesn/reservoir.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace critesn {

inline constexpr double default_ridge_lambda = 1e-8;
inline constexpr std::size_t default_readout_washout = 100;

/// Raised when the normal equations are singular at ridge_lambda == 0.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// y = weights[0..k) . state + weights[k] (bias).
struct ReadoutModel {
    Vector weights;
    double ridge_lambda = default_ridge_lambda;
    std::size_t washout = default_readout_washout;

    std::size_t k() const noexcept { return static_cast<std::size_t>(weights.size()) - 1; }
    double bias() const noexcept { return weights(weights.size() - 1); }

    std::string to_text() const;
    static ReadoutModel parse(std::string_view text);
};

/// Ridge regression on rows [washout, n) with an appended bias column. The bias is
/// regularized along with the weights. Throws std::invalid_argument on bad shapes
/// and SingularSystemError when ridge_lambda == 0 and X^T X is rank deficient.
ReadoutModel train_readout(std::span<const Vector> states,
                           std::span<const double> targets,
                           double ridge_lambda = default_ridge_lambda,
                           std::size_t washout = default_readout_washout);

/// Throws std::invalid_argument on dimension mismatch.
double predict(const ReadoutModel& model, const Vector& state);

/// sqrt(mean squared error / variance of targets).
double nrmse(std::span<const double> predicted, std::span<const double> targets);

}  // namespace critesn
