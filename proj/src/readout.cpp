#include "critesn/readout.hpp"

#include "critesn/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <optional>
#include <sstream>

namespace critesn {

ReadoutModel train_readout(std::span<const Vector> states,
                           std::span<const double> targets,
                           double ridge_lambda,
                           std::size_t washout)
{
    if (states.size() != targets.size())
        throw std::invalid_argument(
          fmt::format("{} states but {} targets", states.size(), targets.size()));
    if (states.empty()) throw std::invalid_argument("no training rows");
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda))
        throw std::invalid_argument("ridge_lambda must be finite and non-negative");
    const auto k = static_cast<std::size_t>(states.front().size());
    if (states.size() < washout + k + 1)
        throw std::invalid_argument(fmt::format(
          "{} rows cannot train k = {} weights after washout {}", states.size(), k, washout));

    const auto rows = static_cast<Eigen::Index>(states.size() - washout);
    const auto cols = static_cast<Eigen::Index>(k + 1);
    Matrix x(rows, cols);
    Vector y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& s = states[washout + static_cast<std::size_t>(r)];
        if (static_cast<std::size_t>(s.size()) != k) throw std::invalid_argument("states differ in dimension");
        x.row(r).head(static_cast<Eigen::Index>(k)) = s.transpose();
        x(r, cols - 1) = 1.0;
        y(r) = targets[washout + static_cast<std::size_t>(r)];
    }

    Matrix a = x.transpose() * x;
    a.diagonal().array() += ridge_lambda;
    const Vector rhs = x.transpose() * y;

    Vector w;
    if (ridge_lambda == 0.0) {
        Eigen::FullPivLU<Matrix> lu(a);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible())
            throw SingularSystemError(fmt::format(
              "normal equations are singular (rank {} of {}) with ridge_lambda = 0", lu.rank(), a.rows()));
        w = lu.solve(rhs);
    } else {
        w = a.ldlt().solve(rhs);
    }

    // Re-multiplication check of the normal equations.
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff() * w.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()});
    const double residual = (a * w - rhs).cwiseAbs().maxCoeff();
    if (!w.allFinite() || residual > 1e-8 * scale)
        throw SingularSystemError(
          fmt::format("normal-equation residual {:.3e} exceeds tolerance; system is ill-conditioned", residual));

    return {std::move(w), ridge_lambda, washout};
}

double predict(const ReadoutModel& model, const Vector& state)
{
    if (static_cast<std::size_t>(state.size()) != model.k())
        throw std::invalid_argument(
          fmt::format("state has {} entries, readout expects {}", state.size(), model.k()));
    return model.weights.head(state.size()).dot(state) + model.bias();
}

double nrmse(std::span<const double> predicted, std::span<const double> targets)
{
    if (predicted.size() != targets.size() || targets.empty())
        throw std::invalid_argument("nrmse needs equally sized nonempty inputs");
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    double mse = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        mse += (predicted[i] - targets[i]) * (predicted[i] - targets[i]);
        var += (targets[i] - mean) * (targets[i] - mean);
    }
    return var > 0.0 ? std::sqrt(mse / var) : std::sqrt(mse / static_cast<double>(targets.size()));
}

std::string ReadoutModel::to_text() const
{
    std::vector<double> values(weights.data(), weights.data() + weights.size());
    std::string out;
    out += fmt::format("k={}\n", k());
    out += fmt::format("ridge_lambda={}\n", format_number(ridge_lambda));
    out += fmt::format("washout={}\n", washout);
    out += fmt::format("weights={}\n", join_numbers(values));
    return out;
}

ReadoutModel ReadoutModel::parse(std::string_view text)
{
    ReadoutModel m;
    std::optional<std::size_t> k;
    std::istringstream in{std::string{text}};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(fmt::format("expected key=value, got '{}'", line));
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        if (key == "k") {
            k = static_cast<std::size_t>(parse_number(value));
        } else if (key == "ridge_lambda") {
            m.ridge_lambda = parse_number(value);
        } else if (key == "washout") {
            m.washout = static_cast<std::size_t>(parse_number(value));
        } else if (key == "weights") {
            const auto w = parse_number_list(value);
            m.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
        } else {
            throw std::invalid_argument(fmt::format("unknown readout key '{}'", key));
        }
    }
    if (m.weights.size() == 0) throw std::invalid_argument("readout text has no weights");
    if (k && *k + 1 != static_cast<std::size_t>(m.weights.size()))
        throw std::invalid_argument("readout k does not match the weight count");
    return m;
}

}  // namespace critesn
