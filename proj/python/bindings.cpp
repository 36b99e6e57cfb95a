#include "cli.hpp"
#include "critesn/analysis.hpp"
#include "critesn/experiments.hpp"
#include "critesn/readout.hpp"
#include "critesn/reservoir.hpp"
#include "critesn/signals.hpp"
#include "critesn/transfer.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace critesn;

namespace {

DistanceSeries to_series(const std::vector<std::size_t>& t, const std::vector<double>& d,
                         std::optional<std::size_t> truncated_at)
{
    if (t.size() != d.size()) throw std::invalid_argument("t and d differ in length");
    return {t, d, truncated_at};
}

py::array_t<double> samples_array(const std::vector<TransferSample>& rows)
{
    py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<py::ssize_t>(i);
        v(r, 0) = rows[i].x;
        v(r, 1) = rows[i].theta;
        v(r, 2) = rows[i].slope;
    }
    return out;
}

ReservoirConfig config_from(const std::string& kind, double alpha, std::optional<double> b, double amplitude,
                            const std::vector<double>& ecps, const std::string& variant, std::uint64_t seed,
                            std::size_t k)
{
    ReservoirConfig c;
    c.kind = kind;
    c.alpha = alpha;
    c.b = b;
    c.amplitude = amplitude;
    c.ecps = EcpList{ecps};
    c.variant = parse_variant(variant);
    c.seed = seed;
    c.k = k;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Critical echo state networks with morphable transfer functions";

    py::register_exception<SingularSystemError>(m, "SingularSystemError", PyExc_ArithmeticError);

    py::class_<MorphableTransfer, std::shared_ptr<MorphableTransfer>>(m, "Transfer")
      .def(py::init([](const std::vector<double>& ecps, const std::string& variant) {
               return std::make_shared<MorphableTransfer>(EcpList{ecps}, parse_variant(variant));
           }),
           py::arg("ecps") = std::vector<double>{-1.0, 0.0, 1.0}, py::arg("variant") = "bridge")
      .def_static("tanh", [] { return std::make_shared<MorphableTransfer>(MorphableTransfer::tanh()); })
      .def("eval", &MorphableTransfer::eval, py::arg("x"))
      .def("eval", [](const MorphableTransfer& f, const py::array_t<double>& x) {
          return py::vectorize([&f](double v) { return f.eval(v); })(x);
      })
      .def("slope", &MorphableTransfer::slope, py::arg("x"))
      .def("slope", [](const MorphableTransfer& f, const py::array_t<double>& x) {
          return py::vectorize([&f](double v) { return f.slope(v); })(x);
      })
      .def("sample", [](const MorphableTransfer& f, double lo, double hi, std::size_t n) {
          return samples_array(f.sample(lo, hi, n));
      }, py::arg("lo"), py::arg("hi"), py::arg("n"), "Rows of (x, theta, slope).")
      .def("validate", [](const MorphableTransfer& f, double grid_step) {
          std::vector<std::tuple<std::string, double, double>> out;
          for (const auto& v : validate(f, grid_step).violations) out.emplace_back(v.what, v.x, v.value);
          return out;
      }, py::arg("grid_step") = 1e-3, "List of (what, x, value) violations; empty when valid.")
      .def_property_readonly("ecps", [](const MorphableTransfer& f) { return f.ecps().points(); })
      .def_property_readonly("variant", [](const MorphableTransfer& f) { return std::string{to_string(f.variant())}; })
      .def_property_readonly("breakpoints", &MorphableTransfer::breakpoints)
      .def("__repr__", [](const MorphableTransfer& f) {
          return "Transfer([" + f.ecps().to_string() + "], '" + std::string{to_string(f.variant())} + "')";
      });

    m.def("generate", [](const std::string& kind, std::size_t length, double amplitude, double gamma,
                         std::uint64_t seed, const std::string& path) {
        const auto v = generate({parse_signal_kind(kind), amplitude, gamma, seed, length, path});
        return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
    }, py::arg("kind"), py::arg("length"), py::arg("amplitude") = 1.0, py::arg("gamma") = 1.0, py::arg("seed") = 0,
       py::arg("path") = "", "Input sequence of kind alternating, constant, iid or file.");

    m.def("random_orthogonal", &random_orthogonal, py::arg("k"), py::arg("seed"));

    py::class_<Reservoir>(m, "Reservoir")
      .def(py::init([](const Matrix& w, const Matrix& w_in, std::vector<std::shared_ptr<MorphableTransfer>> transfers,
                       bool orthogonal) {
               std::vector<TransferPtr> t(transfers.begin(), transfers.end());
               return Reservoir{w, w_in, std::move(t), orthogonal};
           }),
           py::arg("w"), py::arg("w_in"), py::arg("transfers"), py::arg("orthogonal") = false)
      .def_property_readonly("k", &Reservoir::k)
      .def_property_readonly("n", &Reservoir::n)
      .def_property_readonly("w", &Reservoir::w)
      .def_property_readonly("w_in", &Reservoir::w_in)
      .def_property("state", &Reservoir::state, &Reservoir::set_state)
      .def("set_predictor", [](Reservoir& r, std::function<std::optional<std::vector<double>>(std::size_t, std::size_t, Vector)> fn,
                               const std::string& variant) {
          r.set_predictor([fn](std::size_t i, std::size_t t, const Vector& prev) -> std::optional<EcpList> {
              py::gil_scoped_acquire gil;
              auto pts = fn(i, t, prev);
              if (!pts) return std::nullopt;
              return EcpList{*pts};
          }, parse_variant(variant));
      }, py::arg("predictor"), py::arg("variant") = "bridge",
         "predictor(neuron, t, previous_state) returns a list of ECPs or None.")
      .def("step", [](Reservoir& r, double u, std::size_t t) {
          const auto rec = r.step(u, t);
          return py::make_tuple(rec.y_lin, rec.y, rec.slope);
      }, py::arg("u"), py::arg("t") = 0, "Advance one step; returns (y_lin, y, slope).")
      .def("run", [](Reservoir& r, const std::vector<double>& input, std::size_t t0) {
          const auto traj = r.run(input, true, t0);
          const auto n = static_cast<Eigen::Index>(traj.records.size());
          const auto k = static_cast<Eigen::Index>(r.k());
          Matrix y_lin(n, k), y(n, k), slope(n, k);
          for (Eigen::Index i = 0; i < n; ++i) {
              const auto& rec = traj.records[static_cast<std::size_t>(i)];
              y_lin.row(i) = rec.y_lin.transpose();
              y.row(i) = rec.y.transpose();
              slope.row(i) = rec.slope.transpose();
          }
          return py::make_tuple(y_lin, y, slope);
      }, py::arg("input"), py::arg("t0") = 0, "Iterate over the input; returns (y_lin, y, slope) arrays of shape (T, k).");

    m.def("make_reservoir", [](const std::string& kind, double alpha, std::optional<double> b, double amplitude,
                               const std::vector<double>& ecps, const std::string& variant, std::uint64_t seed,
                               std::size_t k) {
        auto cfg = config_from(kind, alpha, b, amplitude, ecps, variant, seed, k);
        if (cfg.kind == "eq8" && !cfg.b) cfg.b = solve_critical_b(cfg.amplitude).b_star;
        return make_reservoir(cfg);
    }, py::arg("kind") = "eq7", py::arg("alpha") = 1.0, py::arg("b") = py::none(),
       py::arg("amplitude") = std::numbers::pi / 4, py::arg("ecps") = std::vector<double>{-1.0, 0.0, 1.0},
       py::arg("variant") = "bridge", py::arg("seed") = 0, py::arg("k") = 8,
       "Build an eq7, eq8 (critical b when omitted) or random orthogonal reservoir.");
    m.def("eq7_orbit_start", [] { return eq7_orbit_start(); });
    m.def("eq8_orbit_start", [](double s) { return eq8_orbit_start(s); }, py::arg("s"));

    py::class_<DistanceSeries>(m, "DistanceSeries")
      .def_readonly("t", &DistanceSeries::t)
      .def_readonly("d", &DistanceSeries::d)
      .def_readonly("truncated_at", &DistanceSeries::truncated_at)
      .def("__len__", &DistanceSeries::size);
    m.def("run_pair", [](const Reservoir& r, const Vector& x0, const Vector& y0, const std::vector<double>& input) {
        return run_pair(r, x0, y0, input);
    }, py::arg("reservoir"), py::arg("x0"), py::arg("y0"), py::arg("input"));

    py::class_<LyapunovEstimate>(m, "LyapunovEstimate")
      .def_readonly("lambda_", &LyapunovEstimate::lambda)
      .def_readonly("std_error", &LyapunovEstimate::std_error)
      .def_readonly("steps_used", &LyapunovEstimate::steps_used)
      .def_readonly("washout", &LyapunovEstimate::washout)
      .def_readonly("d0", &LyapunovEstimate::d0)
      .def_property_readonly("method", [](const LyapunovEstimate& e) { return std::string{to_string(e.method)}; })
      .def("__repr__", [](const LyapunovEstimate& e) { return describe(e); });
    m.def("lyapunov_renormalized", [](const Reservoir& r, const std::vector<double>& input, double d0,
                                      std::size_t washout, std::uint64_t seed) {
        py::gil_scoped_release release;
        return lyapunov_renormalized(r, input, d0, washout, seed);
    }, py::arg("reservoir"), py::arg("input"), py::arg("d0") = default_d0, py::arg("washout") = default_washout,
       py::arg("seed") = 0);
    m.def("lyapunov_derivative_product", [](const Reservoir& r, const std::vector<double>& input, std::size_t washout) {
        return lyapunov_derivative_product(r, input, washout);
    }, py::arg("reservoir"), py::arg("input"), py::arg("washout") = default_washout);

    py::class_<CriticalPoint>(m, "CriticalPoint")
      .def_readonly("b_star", &CriticalPoint::b_star)
      .def_readonly("s_star", &CriticalPoint::s_star)
      .def_readonly("residual_orbit", &CriticalPoint::residual_orbit)
      .def_readonly("residual_tangent", &CriticalPoint::residual_tangent);
    m.def("solve_critical_b", &solve_critical_b, py::arg("amplitude") = std::numbers::pi / 4);

    py::class_<DecayFit>(m, "DecayFit")
      .def_property_readonly("law", [](const DecayFit& f) { return std::string{to_string(f.law)}; })
      .def_readonly("c_a", &DecayFit::c_a)
      .def_readonly("c_b", &DecayFit::c_b)
      .def_readonly("r2_loglog", &DecayFit::r2_loglog)
      .def_readonly("r2_semilog", &DecayFit::r2_semilog)
      .def_readonly("window", &DecayFit::window)
      .def_readonly("truncated_at", &DecayFit::truncated_at)
      .def_readonly("curvature", &DecayFit::curvature)
      .def("__repr__", [](const DecayFit& f) { return describe(f); });
    m.def("fit_power_law", [](const std::vector<std::size_t>& t, const std::vector<double>& d,
                              std::pair<double, double> window) {
        const auto f = fit_power_law(to_series(t, d, std::nullopt), window);
        return py::make_tuple(f.c_a, f.r2);
    }, py::arg("t"), py::arg("d"), py::arg("window"), "Returns (c_a, r2).");
    m.def("fit_exponential", [](const std::vector<std::size_t>& t, const std::vector<double>& d,
                                std::pair<double, double> window) {
        const auto f = fit_exponential(to_series(t, d, std::nullopt), window);
        return py::make_tuple(f.c_b, f.r2);
    }, py::arg("t"), py::arg("d"), py::arg("window"), "Returns (c_b, r2).");
    m.def("classify_decay", [](const DistanceSeries& s) { return classify_decay(s); }, py::arg("series"));
    m.def("classify_decay", [](const std::vector<std::size_t>& t, const std::vector<double>& d,
                               std::optional<std::size_t> truncated_at) {
        return classify_decay(to_series(t, d, truncated_at));
    }, py::arg("t"), py::arg("d"), py::arg("truncated_at") = py::none());

    m.def("default_alpha_grid", &default_alpha_grid);
    m.def("default_gamma_grid", &default_gamma_grid);
    m.def("sweep_alpha", [](std::optional<std::vector<double>> alphas, std::size_t horizon, std::size_t washout,
                            double d0, std::uint64_t seed, unsigned threads) {
        SweepOptions o{horizon, washout, d0, seed, threads};
        std::vector<AlphaSweepRow> rows;
        {
            py::gil_scoped_release release;
            rows = sweep_alpha(alphas.value_or(default_alpha_grid()), o);
        }
        py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            v(static_cast<py::ssize_t>(i), 0) = rows[i].alpha;
            v(static_cast<py::ssize_t>(i), 1) = rows[i].lambda;
            v(static_cast<py::ssize_t>(i), 2) = rows[i].std_error;
        }
        return out;
    }, py::arg("alphas") = py::none(), py::arg("horizon") = default_horizon, py::arg("washout") = default_washout,
       py::arg("d0") = default_d0, py::arg("seed") = 0, py::arg("threads") = 1,
       "Rows of (alpha, lambda, stderr).");
    m.def("sweep_gamma", [](std::optional<std::vector<double>> gammas, std::size_t horizon, std::size_t washout,
                            double d0, std::uint64_t seed, unsigned threads) {
        SweepOptions o{horizon, washout, d0, seed, threads};
        std::vector<GammaSweepRow> rows;
        {
            py::gil_scoped_release release;
            rows = sweep_gamma(gammas.value_or(default_gamma_grid()), o);
        }
        py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{3}});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            v(static_cast<py::ssize_t>(i), 0) = rows[i].gamma;
            v(static_cast<py::ssize_t>(i), 1) = rows[i].lambda_ecp;
            v(static_cast<py::ssize_t>(i), 2) = rows[i].lambda_tanh;
        }
        return out;
    }, py::arg("gammas") = py::none(), py::arg("horizon") = default_horizon, py::arg("washout") = default_washout,
       py::arg("d0") = default_d0, py::arg("seed") = 0, py::arg("threads") = 1,
       "Rows of (gamma, lambda_ecp, lambda_tanh).");

    py::class_<ForgettingRun>(m, "ForgettingRun")
      .def_readonly("seed", &ForgettingRun::seed)
      .def_readonly("series", &ForgettingRun::series)
      .def_readonly("fit", &ForgettingRun::fit);
    m.def("forgetting", [](const std::string& input, double alpha, const std::string& init, double d0,
                           std::size_t horizon, std::size_t replicates, std::uint64_t seed) {
        ForgettingOptions o;
        o.input = parse_signal_kind(input);
        o.alpha = alpha;
        o.init = parse_init_mode(init);
        o.d0 = d0;
        o.horizon = horizon;
        o.replicates = replicates;
        o.seed = seed;
        return forgetting(o);
    }, py::arg("input") = "alternating", py::arg("alpha") = 1.0, py::arg("init") = "fixed-delta",
       py::arg("d0") = 1e-3, py::arg("horizon") = 100000, py::arg("replicates") = 1, py::arg("seed") = 0);

    py::class_<ReadoutModel>(m, "ReadoutModel")
      .def_readonly("weights", &ReadoutModel::weights)
      .def_readonly("ridge_lambda", &ReadoutModel::ridge_lambda)
      .def_readonly("washout", &ReadoutModel::washout)
      .def_property_readonly("bias", &ReadoutModel::bias)
      .def_property_readonly("k", &ReadoutModel::k)
      .def("predict", [](const ReadoutModel& model, const Vector& state) { return predict(model, state); })
      .def("to_text", &ReadoutModel::to_text)
      .def_static("parse", &ReadoutModel::parse);
    m.def("train_readout", [](const Matrix& states, const std::vector<double>& targets, double ridge_lambda,
                              std::size_t washout) {
        std::vector<Vector> rows;
        rows.reserve(static_cast<std::size_t>(states.rows()));
        for (Eigen::Index i = 0; i < states.rows(); ++i) rows.emplace_back(states.row(i).transpose());
        return train_readout(rows, targets, ridge_lambda, washout);
    }, py::arg("states"), py::arg("targets"), py::arg("ridge_lambda") = default_ridge_lambda,
       py::arg("washout") = default_readout_washout, "states has one row per time step.");
    m.def("nrmse", [](const std::vector<double>& p, const std::vector<double>& t) { return nrmse(p, t); });

    m.def("cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Run the command line; returns (exit_code, stdout, stderr).");
}
