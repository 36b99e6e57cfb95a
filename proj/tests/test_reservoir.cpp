#include "critesn/reservoir.hpp"
#include "critesn/rng.hpp"
#include "critesn/signals.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace critesn;

namespace {

std::vector<double> alternating(std::size_t n, double amplitude = 1.0)
{
    return generate({SignalKind::Alternating, amplitude, 1.0, 0, n, {}});
}

}  // namespace

TEST_SUITE("reservoir")
{
    TEST_CASE("random orthogonal matrices")
    {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto w1 = random_orthogonal(1, s);
            CHECK(std::abs(w1(0, 0)) == 1.0);
        }
        const auto w = random_orthogonal(8, 42);
        CHECK(orthogonality_error(w) <= 1e-12);
        CHECK(w == random_orthogonal(8, 42));
        CHECK(w != random_orthogonal(8, 43));
        for (std::size_t k : {2u, 5u, 16u, 64u}) CHECK(orthogonality_error(random_orthogonal(k, k)) <= 1e-12);
        CHECK_THROWS_AS(random_orthogonal(0, 1), std::invalid_argument);
    }

    TEST_CASE("constructor validation")
    {
        auto f = std::make_shared<const MorphableTransfer>(MorphableTransfer::tanh());
        CHECK_THROWS_AS(Reservoir(Matrix::Identity(2, 2), Matrix::Ones(3, 1), {f, f}), std::invalid_argument);
        CHECK_THROWS_AS(Reservoir(Matrix::Identity(2, 2), Matrix::Ones(2, 1), {f}), std::invalid_argument);
        CHECK_THROWS_AS(Reservoir(Matrix::Ones(2, 3), Matrix::Ones(2, 1), {f, f}), std::invalid_argument);
        CHECK_THROWS_AS(Reservoir(Matrix(0, 0), Matrix(0, 1), {}), std::invalid_argument);
        CHECK_THROWS_AS(Reservoir(Matrix::Identity(2, 2), Matrix(2, 0), {f, f}), std::invalid_argument);
        Matrix bad = Matrix::Identity(2, 2);
        bad(0, 1) = NAN;
        CHECK_THROWS_AS(Reservoir(bad, Matrix::Ones(2, 1), {f, f}), std::invalid_argument);
        CHECK_THROWS_AS(Reservoir(2 * Matrix::Identity(2, 2), Matrix::Ones(2, 1), {f, f}, true), std::invalid_argument);
        CHECK_THROWS_AS(Reservoir(Matrix::Identity(2, 2), Matrix::Ones(2, 1), {f, nullptr}), std::invalid_argument);

        Reservoir r{Matrix::Identity(2, 2), Matrix::Ones(2, 1), {f, f}, true};
        CHECK(r.state() == Vector::Zero(2));
        CHECK_THROWS_AS(r.set_state(Vector::Zero(3)), std::invalid_argument);
        CHECK_THROWS_AS(r.step(Vector::Zero(2), 0), std::invalid_argument);
        CHECK_THROWS_AS(r.step(NAN, 0), std::invalid_argument);
    }

    TEST_CASE("eq7 on-orbit linear response is one for every alpha")
    {
        for (double alpha : {0.1, 0.5, 1.0, 1.3}) {
            auto r = make_eq7({alpha});
            r.set_state(Vector::Constant(1, -std::tanh(1.0)));
            const auto rec = r.step(1.0, 0);
            CHECK(rec.y_lin(0) == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(rec.y(0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
        }
        auto r = make_eq7({1.0});
        const auto rec = r.step(0.0, 0);
        CHECK(rec.y(0) == 0.0);
    }

    TEST_CASE("eq7 orbit invariance")
    {
        for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.2}) {
            auto r = make_eq7({alpha});
            r.set_state(eq7_orbit_start());
            const auto traj = r.run(alternating(1000), true);
            for (const auto& rec : traj.records) {
                const double expect = rec.t % 2 == 0 ? 1.0 : -1.0;
                CHECK(std::abs(rec.y_lin(0) - expect) <= 1e-15);
                CHECK(std::abs(rec.y(0) - expect * std::tanh(1.0)) <= 1e-15);
            }
        }
    }

    TEST_CASE("eq7 with y_0 = tanh(1) locks onto the orbit after one step")
    {
        auto r = make_eq7({1.0});
        r.set_state(Vector::Constant(1, std::tanh(1.0)));
        const auto u = alternating(201);
        const auto traj = r.run(std::span<const double>{u}.subspan(1), true, 1);
        for (const auto& rec : traj.records) {
            const double expect = (rec.t % 2 == 0 ? 1.0 : -1.0) * std::tanh(1.0);
            CHECK(std::abs(rec.y(0) - expect) <= 1e-15);
        }
    }

    TEST_CASE("eq8 at the critical coupling holds the period two orbit")
    {
        const double b = 2.344185925965946;
        const double s = 0.7572401709340233;
        auto r = make_eq8({b});
        r.set_state(eq8_orbit_start(s));
        const auto traj = r.run(alternating(1000, std::numbers::pi / 4), true);
        for (const auto& rec : traj.records) {
            const double expect = (rec.t % 2 == 0 ? -1.0 : 1.0) * s;
            CHECK(std::abs(rec.y(0) - expect) <= 1e-9);
        }
        CHECK(std::abs(traj.records[10].y(0)) == doctest::Approx(0.757).epsilon(1e-3));
    }

    TEST_CASE("zero input from the origin stays at the origin")
    {
        const std::vector<double> zeros(300, 0.0);
        for (auto r : {make_eq7({0.7}), make_eq8({2.0}), make_reservoir({.kind = "random", .k = 6})}) {
            const auto traj = r.run(zeros, true);
            for (const auto& rec : traj.records) CHECK(rec.y.isZero(0.0));
        }
    }

    TEST_CASE("recording and memory-light runs agree")
    {
        ReservoirConfig cfg;
        cfg.kind = "random";
        cfg.k = 5;
        cfg.seed = 9;
        const auto u = generate({SignalKind::IidPlusMinus, 1.0, 1.0, 3, 2000, {}});
        auto a = make_reservoir(cfg);
        auto b = make_reservoir(cfg);
        const auto full = a.run(u, true);
        const auto light = b.run(u, false);
        CHECK(light.records.empty());
        CHECK(full.records.size() == u.size());
        CHECK(full.final_state == light.final_state);
        CHECK(full.final_state == a.state());
        for (const auto& rec : full.records)
            for (Eigen::Index i = 0; i < rec.y.size(); ++i) {
                CHECK(rec.y(i) == a.transfers()[static_cast<std::size_t>(i)]->eval(rec.y_lin(i)));
                CHECK(rec.slope(i) == a.transfers()[static_cast<std::size_t>(i)]->slope(rec.y_lin(i)));
            }
    }

    TEST_CASE("trajectories are deterministic per seed")
    {
        ReservoirConfig cfg{.kind = "random", .seed = 11, .k = 7};
        const auto u = generate({SignalKind::IidPlusMinus, 1.0, 1.0, 5, 500, {}});
        auto a = make_reservoir(cfg);
        auto b = make_reservoir(cfg);
        CHECK(trajectory_to_csv(a.run(u, true).records) == trajectory_to_csv(b.run(u, true).records));
    }

    TEST_CASE("run_pair distance series")
    {
        auto r = make_eq7({1.0});
        const auto u = alternating(100);
        const auto same = run_pair(r, eq7_orbit_start(), eq7_orbit_start(), u);
        REQUIRE(same.truncated_at.has_value());
        CHECK(*same.truncated_at == 0);
        CHECK(same.d.back() == 0.0);

        auto half = make_eq7({0.5});
        const auto iid = generate({SignalKind::IidPlusMinus, 1.0, 1.0, 4, 400, {}});
        const Vector x0 = Vector::Constant(1, 0.3);
        const Vector y0 = Vector::Constant(1, -0.45);
        const auto s = run_pair(half, x0, y0, iid);
        const double d0 = 0.75;
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s.d[i] <= d0 * std::pow(0.5, static_cast<double>(s.t[i])) + 1e-12);
            CHECK(s.d[i] >= 0.0);
            if (i > 0) CHECK(s.t[i] > s.t[i - 1]);
        }
        CHECK_THROWS_AS(run_pair(half, x0, Vector::Zero(2), iid), std::invalid_argument);
    }

    TEST_CASE("predictor hook rebuilds transfers before each step")
    {
        auto r = make_eq7({1.0});
        r.set_state(eq7_orbit_start());
        std::size_t calls = 0;
        // A perfect predictor places the single non-trivial ECP at the upcoming
        // linear response, which on this orbit alternates between +1 and -1.
        r.set_predictor([&](std::size_t neuron, std::size_t t, const Vector& prev) -> std::optional<EcpList> {
            ++calls;
            CHECK(neuron == 0);
            CHECK(prev.size() == 1);
            return EcpList{{t % 2 == 0 ? 1.0 : -1.0}};
        });
        CHECK(r.has_predictor());
        const auto traj = r.run(alternating(50), true);
        CHECK(calls == 50);
        for (const auto& rec : traj.records) {
            CHECK(rec.slope(0) == 1.0);
            CHECK(std::abs(rec.y(0)) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
        }
        const double last = traj.records.back().y_lin(0);
        CHECK(r.transfers()[0]->ecps() == EcpList{{last}});
    }

    TEST_CASE("reservoir config text round trip")
    {
        ReservoirConfig c;
        c.kind = "eq8";
        c.b = 2.5;
        c.amplitude = 0.5;
        c.ecps = EcpList{{-2.0, 0.25}};
        c.variant = TransferVariant::Plateau;
        c.seed = 17;
        c.k = 3;
        const auto back = ReservoirConfig::parse(c.to_text());
        CHECK(back.to_text() == c.to_text());
        CHECK(back.b == c.b);
        CHECK(back.ecps == c.ecps);
        CHECK_THROWS_AS(ReservoirConfig::parse("kind=eq7\ncolour=red\n"), std::invalid_argument);
        CHECK_THROWS_AS(make_reservoir(ReservoirConfig{.kind = "eq9"}), std::invalid_argument);
        CHECK_THROWS_AS(make_reservoir(ReservoirConfig{.kind = "eq8"}), std::invalid_argument);
    }

    TEST_CASE("presets reject invalid couplings")
    {
        CHECK_THROWS_AS(make_eq7({0.0}), std::invalid_argument);
        CHECK_THROWS_AS(make_eq7({-1.0}), std::invalid_argument);
        CHECK_THROWS_AS(make_eq8({0.0}), std::invalid_argument);
        CHECK(make_eq7({1.0}).orthogonal());
        CHECK_FALSE(make_eq7({0.5}).orthogonal());
    }

    TEST_CASE("non-expansive under orthogonal weights")
    {
        critesn::Rng rng{77, 123};
        for (int trial = 0; trial < 50; ++trial) {
            ReservoirConfig cfg{.kind = "random", .seed = static_cast<std::uint64_t>(trial), .k = 1 + static_cast<std::size_t>(trial % 16)};
            cfg.variant = trial % 2 == 0 ? TransferVariant::Bridge : TransferVariant::Plateau;
            auto r = make_reservoir(cfg);
            const auto u = generate({SignalKind::IidPlusMinus, 1.0, 1.0, static_cast<std::uint64_t>(trial), 300, {}});
            Vector x0(static_cast<Eigen::Index>(cfg.k)), y0(static_cast<Eigen::Index>(cfg.k));
            for (Eigen::Index i = 0; i < x0.size(); ++i) {
                x0(i) = rng.uniform(-1, 1);
                y0(i) = rng.uniform(-1, 1);
            }
            const auto s = run_pair(r, x0, y0, u);
            double prev = (x0 - y0).norm();
            for (double d : s.d) {
                CHECK(d <= prev + 1e-12);
                prev = d;
            }
        }
    }
}
