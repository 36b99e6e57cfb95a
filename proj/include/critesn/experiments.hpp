#pragma once

// The one-neuron experiments: Lyapunov sweeps, forgetting curves, readout demo. //

#include "critesn/analysis.hpp"
#include "critesn/readout.hpp"
#include "critesn/reservoir.hpp"
#include "critesn/signals.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace critesn {

/// alpha = 0.05, 0.10, ..., 1.50.
std::vector<double> default_alpha_grid();
/// gamma = 0.50, 0.55, ..., 1.50.
std::vector<double> default_gamma_grid();

struct SweepOptions {
    std::size_t horizon = default_horizon;  ///< averaged steps after the washout
    std::size_t washout = default_washout;
    double d0 = default_d0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    EcpList ecps = EcpList{{-1.0, 0.0, 1.0}};
    TransferVariant variant = TransferVariant::Bridge;
};

struct AlphaSweepRow {
    double alpha;
    double lambda;
    double std_error;
};

/// Renormalized Lyapunov exponent of the Eq7 network started on its orbit and
/// driven by the expected alternating +-1 input. Grid values must lie in (0, 1.5].
std::vector<AlphaSweepRow> sweep_alpha(const std::vector<double>& alphas, const SweepOptions& options);

struct GammaSweepRow {
    double gamma;
    double lambda_ecp;
    double lambda_tanh;
};

/// Both one-neuron networks on gamma-scaled alternating input: the Eq7 network at
/// alpha = 1 (amplitude 1) and the critical tanh network (amplitude pi/4), each
/// started on its gamma = 1 orbit. Grid values must lie in [0.25, 2].
std::vector<GammaSweepRow> sweep_gamma(const std::vector<double>& gammas, const SweepOptions& options);

enum class InitMode {
    FixedDelta,  ///< reference on the expected orbit, companion offset by d0
    BitScale     ///< states a tanh(1) and -a tanh(1) for one fair draw a = +-1
};

std::string_view to_string(InitMode m) noexcept;
/// Accepts "fixed-delta" and "bit-scale".
InitMode parse_init_mode(std::string_view text);

struct ForgettingOptions {
    SignalKind input = SignalKind::Alternating;
    double alpha = 1.0;
    InitMode init = InitMode::FixedDelta;
    double d0 = 1e-3;
    std::size_t horizon = 100000;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    EcpList ecps = EcpList{{-1.0, 0.0, 1.0}};
    TransferVariant variant = TransferVariant::Bridge;
};

struct ForgettingRun {
    std::uint64_t seed;  ///< seed of this replicate's input and initialization
    DistanceSeries series;
    DecayFit fit;
};

/// Pairs of Eq7 networks with amplitude-1 input of the given kind. Replicate r uses
/// seed + r. Throws std::invalid_argument for horizon outside [1, 1e6].
std::vector<ForgettingRun> forgetting(const ForgettingOptions& options);

struct ReadoutDemoOptions {
    std::size_t k = 8;
    std::size_t delay = 3;
    std::size_t length = 6000;
    std::size_t washout = default_readout_washout;
    double ridge_lambda = default_ridge_lambda;
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

struct ReadoutDemoResult {
    ReservoirConfig reservoir;
    ReadoutModel model;
    double train_nrmse = 0.0;
    double test_nrmse = 0.0;
    double baseline_nrmse = 0.0;  ///< predicting the training mean on the test rows
};

/// Delayed recall of u_{t - delay} from iid +-1 input through a random orthogonal
/// reservoir with ECP transfers at {-1, 0, 1}.
ReadoutDemoResult readout_demo(const ReadoutDemoOptions& options);

}  // namespace critesn
