#include "critesn/reservoir.hpp"

#include "critesn/csv.hpp"
#include "critesn/rng.hpp"

#include <cmath>
#include <fmt/format.h>
#include <sstream>
#include <stdexcept>

namespace critesn {

namespace {

constexpr double orthogonality_tol = 1e-12;

}  // namespace

Matrix random_orthogonal(std::size_t k, std::uint64_t seed)
{
    if (k == 0) throw std::invalid_argument("random_orthogonal needs k >= 1");
    const auto dim = static_cast<Eigen::Index>(k);
    Rng rng{seed, stream::weights};
    Matrix q = Matrix::Identity(dim, dim);
    for (std::size_t r = 0; r < k; ++r) {
        Vector v(dim);
        double norm = 0.0;
        while (norm < 1e-6) {
            for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
            norm = v.norm();
        }
        v /= norm;
        // q <- q (I - 2 v v^T)
        const Vector qv = q * v;
        q.noalias() -= 2.0 * qv * v.transpose();
    }
    return q;
}

double orthogonality_error(const Matrix& w)
{
    return (w * w.transpose() - Matrix::Identity(w.rows(), w.rows())).cwiseAbs().maxCoeff();
}

// Reservoir ----------------------------------------------------------------

Reservoir::Reservoir(Matrix w, Matrix w_in, std::vector<TransferPtr> transfers, bool orthogonal)
  : w_{std::move(w)}
  , w_in_{std::move(w_in)}
  , transfers_{std::move(transfers)}
  , orthogonal_{orthogonal}
{
    if (w_.rows() < 1 || w_.rows() != w_.cols()) throw std::invalid_argument("W must be square with k >= 1");
    if (w_in_.rows() != w_.rows() || w_in_.cols() < 1)
        throw std::invalid_argument(fmt::format(
          "w_in must be {} x n with n >= 1, got {} x {}", w_.rows(), w_in_.rows(), w_in_.cols()));
    if (transfers_.size() != k())
        throw std::invalid_argument(fmt::format("need {} transfer functions, got {}", k(), transfers_.size()));
    for (const auto& f : transfers_)
        if (!f) throw std::invalid_argument("null transfer function");
    if (!w_.allFinite() || !w_in_.allFinite()) throw std::invalid_argument("weights must be finite");
    if (orthogonal_ && orthogonality_error(w_) > orthogonality_tol)
        throw std::invalid_argument("W is flagged orthogonal but |W W^T - I| exceeds 1e-12");
    state_ = Vector::Zero(w_.rows());
}

void Reservoir::set_state(const Vector& y)
{
    if (static_cast<std::size_t>(y.size()) != k())
        throw std::invalid_argument(fmt::format("state has {} entries, reservoir has {}", y.size(), k()));
    state_ = y;
}

void Reservoir::set_predictor(Predictor predictor, TransferVariant variant)
{
    predictor_ = std::move(predictor);
    predictor_variant_ = variant;
}

void Reservoir::refresh(std::size_t t)
{
    if (!predictor_) return;
    for (std::size_t i = 0; i < k(); ++i) {
        if (auto ecps = predictor_(i, t, state_))
            transfers_[i] = std::make_shared<const MorphableTransfer>(std::move(*ecps), predictor_variant_);
    }
}

Vector Reservoir::linear_response(const Vector& previous, const Vector& u) const
{
    if (static_cast<std::size_t>(u.size()) != n())
        throw std::invalid_argument(fmt::format("input has {} entries, reservoir expects {}", u.size(), n()));
    if (!u.allFinite()) throw std::invalid_argument("input must be finite");
    if (static_cast<std::size_t>(previous.size()) != k())
        throw std::invalid_argument(fmt::format("state has {} entries, reservoir has {}", previous.size(), k()));
    return w_ * previous + w_in_ * u;
}

StepRecord Reservoir::step(const Vector& u, std::size_t t)
{
    refresh(t);
    StepRecord rec;
    rec.t = t;
    rec.y_lin = linear_response(state_, u);
    rec.y.resize(rec.y_lin.size());
    rec.slope.resize(rec.y_lin.size());
    for (Eigen::Index i = 0; i < rec.y_lin.size(); ++i) {
        const auto& f = *transfers_[static_cast<std::size_t>(i)];
        rec.y(i) = f.eval(rec.y_lin(i));
        rec.slope(i) = f.slope(rec.y_lin(i));
    }
    state_ = rec.y;
    return rec;
}

StepRecord Reservoir::step(double u, std::size_t t)
{
    return step(replicate(u), t);
}

Vector Reservoir::propagate(const Vector& previous, const Vector& u) const
{
    Vector y = linear_response(previous, u);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = transfers_[static_cast<std::size_t>(i)]->eval(y(i));
    return y;
}

Vector Reservoir::propagate(const Vector& previous, double u) const
{
    return propagate(previous, replicate(u));
}

Trajectory Reservoir::run(std::span<const double> input, bool record, std::size_t t0)
{
    if (input.empty()) throw std::invalid_argument("input sequence is empty");
    Trajectory out;
    if (record) out.records.reserve(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        auto rec = step(input[i], t0 + i);
        if (record) out.records.push_back(std::move(rec));
    }
    out.final_state = state_;
    return out;
}

DistanceSeries run_pair(Reservoir r, const Vector& x0, const Vector& y0, std::span<const double> input)
{
    r.set_state(x0);
    if (static_cast<std::size_t>(y0.size()) != r.k())
        throw std::invalid_argument(fmt::format("state has {} entries, reservoir has {}", y0.size(), r.k()));
    DistanceSeries series;
    Vector y = y0;
    double d = (y - x0).norm();
    series.t.push_back(0);
    series.d.push_back(d);
    if (d == 0.0) {
        series.truncated_at = 0;
        return series;
    }
    for (std::size_t i = 0; i < input.size(); ++i) {
        r.step(input[i], i);
        y = r.propagate(y, input[i]);
        d = (y - r.state()).norm();
        series.t.push_back(i + 1);
        series.d.push_back(d);
        if (d == 0.0) {
            series.truncated_at = i + 1;
            break;
        }
    }
    return series;
}

// Presets ------------------------------------------------------------------

Reservoir make_eq7(const Eq7Config& config)
{
    if (!(config.alpha > 0.0) || !std::isfinite(config.alpha)) throw std::invalid_argument("alpha must be positive");
    Matrix w(1, 1);
    w(0, 0) = -config.alpha;
    Matrix w_in(1, 1);
    w_in(0, 0) = 1.0 - config.alpha * std::tanh(1.0);
    auto f = std::make_shared<const MorphableTransfer>(config.ecps, config.variant);
    return Reservoir{std::move(w), std::move(w_in), {f}, config.alpha == 1.0};
}

Reservoir make_eq8(const Eq8Config& config)
{
    if (!(config.b > 0.0) || !std::isfinite(config.b)) throw std::invalid_argument("b must be positive");
    Matrix w(1, 1);
    w(0, 0) = -config.b;
    Matrix w_in = Matrix::Ones(1, 1);
    auto f = std::make_shared<const MorphableTransfer>(MorphableTransfer::tanh());
    return Reservoir{std::move(w), std::move(w_in), {f}};
}

Vector eq7_orbit_start()
{
    return Vector::Constant(1, -std::tanh(1.0));
}

Vector eq8_orbit_start(double s)
{
    return Vector::Constant(1, s);
}

// Config -------------------------------------------------------------------

std::string ReservoirConfig::to_text() const
{
    std::string out;
    out += fmt::format("kind={}\n", kind);
    out += fmt::format("alpha={}\n", format_number(alpha));
    out += fmt::format("b={}\n", b ? format_number(*b) : std::string{});
    out += fmt::format("amplitude={}\n", format_number(amplitude));
    out += fmt::format("ecps={}\n", ecps.to_string());
    out += fmt::format("variant={}\n", to_string(variant));
    out += fmt::format("seed={}\n", seed);
    out += fmt::format("k={}\n", k);
    return out;
}

namespace {

std::uint64_t parse_unsigned(std::string_view key, std::string_view value)
{
    try {
        std::size_t used = 0;
        const std::string s{value};
        if (s.empty() || s.front() == '-') throw std::invalid_argument(s);
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(fmt::format("bad value for '{}': '{}'", key, value));
    }
}

}  // namespace

ReservoirConfig ReservoirConfig::parse(std::string_view text)
{
    ReservoirConfig c;
    std::istringstream in{std::string{text}};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(fmt::format("expected key=value, got '{}'", line));
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "kind") {
            if (value != "eq7" && value != "eq8" && value != "random")
                throw std::invalid_argument(fmt::format("unknown reservoir kind '{}'", value));
            c.kind = value;
        } else if (key == "alpha") {
            c.alpha = parse_number(value);
        } else if (key == "b") {
            c.b = value.empty() ? std::nullopt : std::optional<double>{parse_number(value)};
        } else if (key == "amplitude") {
            c.amplitude = parse_number(value);
        } else if (key == "ecps") {
            c.ecps = EcpList::parse(value);
        } else if (key == "variant") {
            c.variant = parse_variant(value);
        } else if (key == "seed") {
            c.seed = parse_unsigned(key, value);
        } else if (key == "k") {
            c.k = parse_unsigned(key, value);
        } else {
            throw std::invalid_argument(fmt::format("unknown reservoir key '{}'", key));
        }
    }
    return c;
}

Reservoir make_reservoir(const ReservoirConfig& config)
{
    if (config.kind == "eq7") return make_eq7({config.alpha, config.ecps, config.variant});
    if (config.kind == "eq8") {
        if (!config.b) throw std::invalid_argument("eq8 reservoir needs b");
        return make_eq8({*config.b, config.amplitude});
    }
    if (config.kind == "random") {
        if (config.k < 1) throw std::invalid_argument("random reservoir needs k >= 1");
        Matrix w = random_orthogonal(config.k, config.seed);
        const auto dim = static_cast<Eigen::Index>(config.k);
        Matrix w_in(dim, 1);
        Rng rng{config.seed, stream::input_weights};
        for (Eigen::Index i = 0; i < dim; ++i) w_in(i, 0) = rng.uniform(-1.0, 1.0);
        auto f = std::make_shared<const MorphableTransfer>(config.ecps, config.variant);
        return Reservoir{std::move(w), std::move(w_in), std::vector<TransferPtr>(config.k, f), true};
    }
    throw std::invalid_argument(fmt::format("unknown reservoir kind '{}'", config.kind));
}

// CSV ----------------------------------------------------------------------

std::string trajectory_to_csv(std::span<const StepRecord> records)
{
    std::string out = "t";
    const Eigen::Index k = records.empty() ? 0 : records.front().y.size();
    for (Eigen::Index i = 0; i < k; ++i) out += fmt::format(",y_lin_{}", i);
    for (Eigen::Index i = 0; i < k; ++i) out += fmt::format(",y_{}", i);
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.t);
        for (Eigen::Index i = 0; i < k; ++i) out += "," + format_number(r.y_lin(i));
        for (Eigen::Index i = 0; i < k; ++i) out += "," + format_number(r.y(i));
        out += '\n';
    }
    return out;
}

std::string distances_to_csv(const DistanceSeries& series)
{
    std::string out = "t,d\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out += fmt::format("{},{}\n", series.t[i], format_number(series.d[i]));
    return out;
}

}  // namespace critesn
