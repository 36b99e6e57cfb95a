#include "critesn/experiments.hpp"

#include "critesn/parallel.hpp"
#include "critesn/rng.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

namespace critesn {

std::vector<double> default_alpha_grid()
{
    std::vector<double> g;
    for (int i = 1; i <= 30; ++i) g.push_back(i / 20.0);
    return g;
}

std::vector<double> default_gamma_grid()
{
    std::vector<double> g;
    for (int i = 10; i <= 30; ++i) g.push_back(i / 20.0);
    return g;
}

namespace {

void check_sweep(const SweepOptions& o)
{
    if (o.horizon < min_lyapunov_steps)
        throw std::invalid_argument(fmt::format("horizon {} is below {}", o.horizon, min_lyapunov_steps));
}

std::vector<double> alternating(double amplitude, double gamma, std::size_t length)
{
    return generate({SignalKind::Alternating, amplitude, gamma, 0, length, {}});
}

}  // namespace

std::vector<AlphaSweepRow> sweep_alpha(const std::vector<double>& alphas, const SweepOptions& options)
{
    check_sweep(options);
    if (alphas.empty()) throw std::invalid_argument("alpha grid is empty");
    for (double a : alphas)
        if (!(a > 0.0 && a <= 1.5)) throw std::invalid_argument(fmt::format("alpha {} outside (0, 1.5]", a));

    const auto input = alternating(1.0, 1.0, options.washout + options.horizon);
    return parallel_map(alphas.size(), options.threads, [&](std::size_t i) {
        auto r = make_eq7({alphas[i], options.ecps, options.variant});
        r.set_state(eq7_orbit_start());
        const auto e = lyapunov_renormalized(r, input, options.d0, options.washout, options.seed + i);
        return AlphaSweepRow{alphas[i], e.lambda, e.std_error};
    });
}

std::vector<GammaSweepRow> sweep_gamma(const std::vector<double>& gammas, const SweepOptions& options)
{
    check_sweep(options);
    if (gammas.empty()) throw std::invalid_argument("gamma grid is empty");
    for (double g : gammas)
        if (!(g >= 0.25 && g <= 2.0)) throw std::invalid_argument(fmt::format("gamma {} outside [0.25, 2]", g));

    constexpr double tanh_amplitude = std::numbers::pi / 4.0;
    const auto critical = solve_critical_b(tanh_amplitude);
    const std::size_t length = options.washout + options.horizon;

    return parallel_map(gammas.size(), options.threads, [&](std::size_t i) {
        const double g = gammas[i];
        auto ecp = make_eq7({1.0, options.ecps, options.variant});
        ecp.set_state(eq7_orbit_start());
        const auto e1 = lyapunov_renormalized(ecp, alternating(1.0, g, length), options.d0, options.washout,
                                              options.seed + 2 * i);

        auto tanh_net = make_eq8({critical.b_star, tanh_amplitude});
        tanh_net.set_state(eq8_orbit_start(critical.s_star));
        const auto e2 = lyapunov_renormalized(tanh_net, alternating(tanh_amplitude, g, length), options.d0,
                                              options.washout, options.seed + 2 * i + 1);
        return GammaSweepRow{g, e1.lambda, e2.lambda};
    });
}

std::string_view to_string(InitMode m) noexcept
{
    return m == InitMode::FixedDelta ? "fixed-delta" : "bit-scale";
}

InitMode parse_init_mode(std::string_view text)
{
    if (text == "fixed-delta") return InitMode::FixedDelta;
    if (text == "bit-scale") return InitMode::BitScale;
    throw std::invalid_argument(fmt::format("unknown init mode '{}'", text));
}

std::vector<ForgettingRun> forgetting(const ForgettingOptions& o)
{
    if (o.horizon < 1 || o.horizon > 1000000)
        throw std::invalid_argument(fmt::format("horizon {} outside [1, 1e6]", o.horizon));
    if (o.replicates < 1) throw std::invalid_argument("need at least one replicate");
    if (o.input == SignalKind::FromFile) throw std::invalid_argument("forgetting runs use generated input");
    if (o.init == InitMode::FixedDelta && !(o.d0 > 0.0 && std::isfinite(o.d0)))
        throw std::invalid_argument("d0 must be positive");

    const auto net = make_eq7({o.alpha, o.ecps, o.variant});
    const double t1 = std::tanh(1.0);
    std::vector<ForgettingRun> runs;
    for (std::size_t rep = 0; rep < o.replicates; ++rep) {
        const std::uint64_t seed = o.seed + rep;
        const auto input = generate({o.input, 1.0, 1.0, seed, o.horizon, {}});
        Vector x0;
        Vector y0;
        if (o.init == InitMode::FixedDelta) {
            x0 = eq7_orbit_start();
            y0 = x0 + Vector::Constant(1, o.d0);
        } else {
            Rng rng{seed, stream::initial_state};
            const double a = rng.sign();
            x0 = Vector::Constant(1, a * t1);
            y0 = Vector::Constant(1, -a * t1);
        }
        auto series = run_pair(net, x0, y0, input);
        auto fit = classify_decay(series);
        runs.push_back({seed, std::move(series), fit});
    }
    return runs;
}

ReadoutDemoResult readout_demo(const ReadoutDemoOptions& o)
{
    if (o.k < 1) throw std::invalid_argument("readout demo needs k >= 1");
    if (!(o.train_fraction > 0.0 && o.train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    ReadoutDemoResult out;
    out.reservoir.kind = "random";
    out.reservoir.k = o.k;
    out.reservoir.seed = o.seed;
    auto r = make_reservoir(out.reservoir);

    const auto u = generate({SignalKind::IidPlusMinus, 1.0, 1.0, o.seed, o.length, {}});
    const auto traj = r.run(u, true);

    std::vector<Vector> states;
    std::vector<double> targets;
    for (std::size_t t = o.delay; t < u.size(); ++t) {
        states.push_back(traj.records[t].y);
        targets.push_back(u[t - o.delay]);
    }
    const auto n_train = static_cast<std::size_t>(o.train_fraction * static_cast<double>(states.size()));
    if (n_train >= states.size()) throw std::invalid_argument("no rows left for testing");

    const std::span<const Vector> all_states{states};
    const std::span<const double> all_targets{targets};
    out.model = train_readout(all_states.first(n_train), all_targets.first(n_train), o.ridge_lambda, o.washout);

    auto score = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> pred;
        for (std::size_t i = lo; i < hi; ++i) pred.push_back(predict(out.model, states[i]));
        return nrmse(pred, all_targets.subspan(lo, hi - lo));
    };
    out.train_nrmse = score(o.washout, n_train);
    out.test_nrmse = score(n_train, states.size());

    double mean = 0.0;
    for (std::size_t i = o.washout; i < n_train; ++i) mean += targets[i];
    mean /= static_cast<double>(n_train - o.washout);
    const std::vector<double> baseline(states.size() - n_train, mean);
    out.baseline_nrmse = nrmse(baseline, all_targets.subspan(n_train));
    return out;
}

}  // namespace critesn
