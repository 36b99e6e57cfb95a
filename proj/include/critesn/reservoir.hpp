#pragma once

// Echo state reservoir dynamics with per-neuron morphable transfer functions. //

#include "critesn/transfer.hpp"

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace critesn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Orthogonal k x k matrix built as a product of k Householder reflections of
/// seeded random unit vectors. Throws std::invalid_argument for k == 0.
Matrix random_orthogonal(std::size_t k, std::uint64_t seed);

/// max |W W^T - I|.
double orthogonality_error(const Matrix& w);

/// One update y_lin = W y_prev + w_in u, y = theta(y_lin).
struct StepRecord {
    std::size_t t = 0;
    Vector y_lin;
    Vector y;
    Vector slope;  ///< per-neuron transfer slope at y_lin
};

struct Trajectory {
    std::vector<StepRecord> records;  ///< empty unless recording was requested
    Vector final_state;
};

/// Distance between two trajectories driven by the same input. Entry 0 is the
/// initial separation; entry t follows the t-th input item.
struct DistanceSeries {
    std::vector<std::size_t> t;
    std::vector<double> d;
    std::optional<std::size_t> truncated_at;  ///< step at which d hit exactly zero

    std::size_t size() const noexcept { return d.size(); }
};

/// Predictor hook: returns new ECPs for `neuron` before step `t` given the previous
/// state, or nullopt to keep the current transfer.
using Predictor =
  std::function<std::optional<EcpList>(std::size_t neuron, std::size_t t, const Vector& previous_state)>;

class Reservoir {
public:
    /// One transfer per neuron. Throws std::invalid_argument on shape mismatch,
    /// non-finite weights, or (when `orthogonal` is set) a W that is not orthogonal.
    Reservoir(Matrix w, Matrix w_in, std::vector<TransferPtr> transfers, bool orthogonal = false);

    std::size_t k() const noexcept { return static_cast<std::size_t>(w_.rows()); }
    std::size_t n() const noexcept { return static_cast<std::size_t>(w_in_.cols()); }
    const Matrix& w() const noexcept { return w_; }
    const Matrix& w_in() const noexcept { return w_in_; }
    bool orthogonal() const noexcept { return orthogonal_; }
    const std::vector<TransferPtr>& transfers() const noexcept { return transfers_; }

    const Vector& state() const noexcept { return state_; }
    void set_state(const Vector& y);

    /// Installs a predictor; rebuilt transfers use `variant`.
    void set_predictor(Predictor predictor, TransferVariant variant = TransferVariant::Bridge);
    bool has_predictor() const noexcept { return static_cast<bool>(predictor_); }

    /// Refreshes transfers through the predictor, then advances the state.
    StepRecord step(const Vector& u, std::size_t t);
    /// Scalar input replicated over all n input channels.
    StepRecord step(double u, std::size_t t);

    /// Applies the current transfers to an arbitrary previous state. Does not touch
    /// the reservoir state and does not consult the predictor.
    Vector propagate(const Vector& previous, const Vector& u) const;
    Vector propagate(const Vector& previous, double u) const;

    /// Iterates step() over the input, numbering steps from `t0`.
    Trajectory run(std::span<const double> input, bool record, std::size_t t0 = 0);

private:
    void refresh(std::size_t t);
    Vector linear_response(const Vector& previous, const Vector& u) const;
    Vector replicate(double u) const { return Vector::Constant(static_cast<Eigen::Index>(n()), u); }

    Matrix w_;
    Matrix w_in_;
    std::vector<TransferPtr> transfers_;
    bool orthogonal_;
    Vector state_;
    Predictor predictor_;
    TransferVariant predictor_variant_ = TransferVariant::Bridge;
};

/// Runs two copies of the reservoir from x0 and y0 on the same input and records
/// their Euclidean distance. Stops as soon as the distance is exactly zero.
/// The predictor (if any) follows the x trajectory and both copies share its transfers.
DistanceSeries run_pair(Reservoir r, const Vector& x0, const Vector& y0, std::span<const double> input);

/// One-neuron network x_t = theta(-alpha x_{t-1} + (1 - alpha tanh 1) u_t) with
/// ECPs placed where the expected alternating +-1 input drives the linear response.
struct Eq7Config {
    double alpha = 1.0;
    EcpList ecps = EcpList{{-1.0, 0.0, 1.0}};
    TransferVariant variant = TransferVariant::Bridge;
};

/// One-neuron tanh network x_t = tanh(-b x_{t-1} + u_t).
struct Eq8Config {
    double b = 1.0;
    double amplitude = 0.78539816339744831;  ///< pi / 4
};

/// Both presets start from the zero state.
Reservoir make_eq7(const Eq7Config& config);
Reservoir make_eq8(const Eq8Config& config);

/// Previous state that puts the Eq7 network on its expected-input orbit when the
/// first input is +1: the trajectory is then y_t = (-1)^t tanh(1) exactly.
Vector eq7_orbit_start();

/// Previous state that puts the Eq8 network on its period-2 orbit of amplitude s
/// when the first input is +amplitude: the trajectory is y_t = -(-1)^t s.
Vector eq8_orbit_start(double s);

/// Flat key-value description of a reservoir.
struct ReservoirConfig {
    std::string kind = "eq7";  ///< eq7 | eq8 | random
    double alpha = 1.0;
    std::optional<double> b;  ///< eq8; solved from the amplitude by callers when absent
    double amplitude = 0.78539816339744831;
    EcpList ecps = EcpList{{-1.0, 0.0, 1.0}};
    TransferVariant variant = TransferVariant::Bridge;
    std::uint64_t seed = 0;
    std::size_t k = 8;

    /// `key=value` lines in a fixed key order.
    std::string to_text() const;
    /// Unknown keys and malformed values throw std::invalid_argument.
    static ReservoirConfig parse(std::string_view text);
};

/// Builds the reservoir described by the config. The `random` kind uses a seeded
/// orthogonal W, input weights uniform in [-1, 1] and the config ECPs on every neuron.
Reservoir make_reservoir(const ReservoirConfig& config);

/// CSV with header `t,y_lin_0..y_lin_{k-1},y_0..y_{k-1}`.
std::string trajectory_to_csv(std::span<const StepRecord> records);

/// CSV with header `t,d`.
std::string distances_to_csv(const DistanceSeries& series);

}  // namespace critesn
