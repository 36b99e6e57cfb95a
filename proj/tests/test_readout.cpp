#include "critesn/experiments.hpp"
#include "critesn/readout.hpp"
#include "critesn/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace critesn;

namespace {

struct Data {
    std::vector<Vector> states;
    std::vector<double> targets;
};

Data noisy_linear(std::size_t rows, std::size_t k, std::uint64_t seed)
{
    Rng rng{seed};
    Data d;
    for (std::size_t r = 0; r < rows; ++r) {
        Vector s(static_cast<Eigen::Index>(k));
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = rng.uniform(-1, 1);
        double y = 0.5;
        for (Eigen::Index i = 0; i < s.size(); ++i) y += (i + 1.0) * s(i);
        d.states.push_back(s);
        d.targets.push_back(y + 0.1 * rng.normal());
    }
    return d;
}

double training_mse(const ReadoutModel& m, const Data& d)
{
    double sse = 0;
    for (std::size_t i = m.washout; i < d.states.size(); ++i) {
        const double e = predict(m, d.states[i]) - d.targets[i];
        sse += e * e;
    }
    return sse / static_cast<double>(d.states.size() - m.washout);
}

}  // namespace

TEST_SUITE("readout")
{
    TEST_CASE("exact linear map")
    {
        Data d;
        for (int i = 0; i < 50; ++i) {
            d.states.push_back(Vector::Constant(1, 0.1 * i - 2));
            d.targets.push_back(2 * (0.1 * i - 2));
        }
        const auto m = train_readout(d.states, d.targets, 0.0, 0);
        CHECK(m.weights(0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::abs(m.bias()) <= 1e-12);
        CHECK(training_mse(m, d) <= 1e-24);
    }

    TEST_CASE("constant target")
    {
        Data d;
        for (int i = 0; i < 40; ++i) {
            d.states.push_back(Vector::Constant(1, std::sin(i)));
            d.targets.push_back(5.0);
        }
        const auto m = train_readout(d.states, d.targets, 0.0, 0);
        CHECK(std::abs(m.weights(0)) <= 1e-12);
        CHECK(m.bias() == doctest::Approx(5.0).epsilon(1e-12));
    }

    TEST_CASE("singular systems are reported at zero ridge")
    {
        Data d;
        for (int i = 0; i < 40; ++i) {
            d.states.push_back(Vector::Constant(2, 0.3 * i));
            d.targets.push_back(i);
        }
        CHECK_THROWS_AS(train_readout(d.states, d.targets, 0.0, 0), SingularSystemError);
        CHECK_NOTHROW(train_readout(d.states, d.targets, 1e-6, 0));
    }

    TEST_CASE("invalid training input")
    {
        const auto d = noisy_linear(20, 3, 1);
        CHECK_THROWS_AS(train_readout(d.states, std::span<const double>{d.targets}.first(19), 1e-8, 0),
                        std::invalid_argument);
        CHECK_THROWS_AS(train_readout(d.states, d.targets, -1.0, 0), std::invalid_argument);
        CHECK_THROWS_AS(train_readout(d.states, d.targets, 1e-8, 17), std::invalid_argument);
        CHECK_NOTHROW(train_readout(d.states, d.targets, 1e-8, 16));
        CHECK_THROWS_AS(train_readout({}, {}, 1e-8, 0), std::invalid_argument);
    }

    TEST_CASE("matches an independent ridge solver")
    {
        const auto d = noisy_linear(300, 5, 2);
        for (double lambda : {0.0, 1e-8, 0.5, 20.0}) {
            const auto m = train_readout(d.states, d.targets, lambda, 10);
            Eigen::MatrixXd x(290, 6);
            Eigen::VectorXd y(290);
            for (Eigen::Index r = 0; r < 290; ++r) {
                x.row(r).head(5) = d.states[static_cast<std::size_t>(r) + 10].transpose();
                x(r, 5) = 1.0;
                y(r) = d.targets[static_cast<std::size_t>(r) + 10];
            }
            const auto ref = oracle::ridge_qr(x, y, lambda);
            CHECK((m.weights - ref).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }

    TEST_CASE("ridge shrinks coefficients and raises training error")
    {
        const auto d = noisy_linear(200, 4, 3);
        double prev_norm = INFINITY;
        double prev_mse = 0.0;
        for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
            const auto m = train_readout(d.states, d.targets, lambda, 0);
            const double norm = m.weights.norm();
            const double mse = training_mse(m, d);
            CHECK(norm < prev_norm);
            CHECK(mse >= prev_mse);
            prev_norm = norm;
            prev_mse = mse;
        }
    }

    TEST_CASE("prediction")
    {
        ReadoutModel m;
        m.weights = Vector::Zero(4);
        m.weights(3) = 1.75;
        CHECK(predict(m, Vector::Constant(3, 9.0)) == 1.75);
        CHECK_THROWS_AS(predict(m, Vector::Zero(2)), std::invalid_argument);

        const auto d = noisy_linear(100, 3, 4);
        const auto fit = train_readout(d.states, d.targets, 0.0, 0);
        for (std::size_t i = 0; i < d.states.size(); ++i) {
            const double manual = fit.weights.head(3).dot(d.states[i]) + fit.bias();
            CHECK(std::abs(predict(fit, d.states[i]) - manual) <= 1e-9);
        }
    }

    TEST_CASE("model text round trip")
    {
        const auto d = noisy_linear(60, 3, 5);
        const auto m = train_readout(d.states, d.targets, 1e-3, 7);
        const auto back = ReadoutModel::parse(m.to_text());
        CHECK(back.weights == m.weights);
        CHECK(back.ridge_lambda == m.ridge_lambda);
        CHECK(back.washout == 7);
        CHECK_THROWS_AS(ReadoutModel::parse("k=2\nweights=1,2\n"), std::invalid_argument);
        CHECK_THROWS_AS(ReadoutModel::parse("weights=1\nshape=3\n"), std::invalid_argument);
    }

    TEST_CASE("delayed recall beats the mean predictor")
    {
        const auto res = readout_demo({});
        CHECK(res.test_nrmse < res.baseline_nrmse);
        CHECK(res.train_nrmse < 1.0);
        CHECK(res.model.k() == 8);
    }

    TEST_CASE("nrmse")
    {
        const std::vector<double> t{1, -1, 1, -1};
        CHECK(nrmse(t, t) == 0.0);
        const std::vector<double> zero(4, 0.0);
        CHECK(nrmse(zero, t) == doctest::Approx(1.0));
        CHECK_THROWS_AS(nrmse(zero, std::span<const double>{t}.first(3)), std::invalid_argument);
    }
}
