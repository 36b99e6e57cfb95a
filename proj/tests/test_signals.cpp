#include "critesn/csv.hpp"
#include "critesn/rng.hpp"
#include "critesn/signals.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

using namespace critesn;

TEST_SUITE("signals")
{
    TEST_CASE("alternating sequences")
    {
        CHECK(generate({SignalKind::Alternating, 1.0, 1.0, 0, 4, {}}) == std::vector<double>{1, -1, 1, -1});
        const auto s = generate({SignalKind::Alternating, std::numbers::pi / 4, 1.0, 0, 2, {}});
        CHECK(s[0] == std::numbers::pi / 4);
        CHECK(s[1] == -std::numbers::pi / 4);
        const auto long_run = generate({SignalKind::Alternating, 0.3, 1.7, 0, 1001, {}});
        for (std::size_t t = 0; t + 1 < long_run.size(); ++t) CHECK(long_run[t + 1] == -long_run[t]);
    }

    TEST_CASE("scaling")
    {
        for (auto kind : {SignalKind::Alternating, SignalKind::Constant, SignalKind::IidPlusMinus}) {
            const auto base = generate({kind, 0.7, 1.0, 5, 64, {}});
            const auto same = generate({kind, 0.7, 1.0, 5, 64, {}});
            CHECK(base == same);
            const auto scaled = generate({kind, 0.7, 1.3, 5, 64, {}});
            for (std::size_t t = 0; t < base.size(); ++t) CHECK(scaled[t] == 1.3 * base[t]);
        }
        CHECK(generate({SignalKind::Constant, 2.5, 1.0, 0, 3, {}}) == std::vector<double>{2.5, 2.5, 2.5});
    }

    TEST_CASE("iid sequences are fair and seed dependent")
    {
        const auto a = generate({SignalKind::IidPlusMinus, 1.0, 1.0, 42, 1000000, {}});
        double sum = 0;
        for (double v : a) {
            CHECK_FALSE(std::abs(v) != 1.0);
            sum += v;
        }
        const double mean = sum / static_cast<double>(a.size());
        CHECK(mean >= -0.004);
        CHECK(mean <= 0.004);
        const auto b = generate({SignalKind::IidPlusMinus, 1.0, 1.0, 43, 1000, {}});
        CHECK(std::vector<double>(a.begin(), a.begin() + 1000) != b);
    }

    TEST_CASE("invalid specs")
    {
        CHECK_THROWS_AS(generate({SignalKind::Alternating, 1.0, 1.0, 0, 0, {}}), std::invalid_argument);
        CHECK_THROWS_AS(generate({SignalKind::Alternating, NAN, 1.0, 0, 3, {}}), std::invalid_argument);
        CHECK_THROWS_AS(generate({SignalKind::Alternating, INFINITY, 1.0, 0, 3, {}}), std::invalid_argument);
        CHECK_THROWS_AS(generate({SignalKind::Alternating, 1.0, 0.0, 0, 3, {}}), std::invalid_argument);
        CHECK_THROWS_AS(generate({SignalKind::Alternating, 1.0, -1.0, 0, 3, {}}), std::invalid_argument);
        CHECK_THROWS_AS(generate({SignalKind::FromFile, 1.0, 1.0, 0, 3, "/nonexistent/input.txt"}), std::runtime_error);
        CHECK_THROWS_AS(parse_signal_kind("noise"), std::invalid_argument);
        CHECK(parse_signal_kind("iid") == SignalKind::IidPlusMinus);
        CHECK(to_string(SignalKind::Constant) == "constant");
    }

    TEST_CASE("sequences from files")
    {
        const auto path = std::filesystem::temp_directory_path() / "critesn_signal_test.txt";
        {
            std::ofstream out{path};
            out << "0.5\n-1\n\n2e-3\n";
        }
        const auto s = generate({SignalKind::FromFile, 2.0, 1.0, 0, 3, path});
        CHECK(s == std::vector<double>{1.0, -2.0, 4e-3});
        CHECK_THROWS_AS(generate({SignalKind::FromFile, 1.0, 1.0, 0, 4, path}), std::runtime_error);
        std::filesystem::remove(path);

        const auto csv = sequence_to_csv(s);
        CHECK(csv == "t,u\n0,1\n1,-2\n2,0.0040000000000000001\n");
    }

    TEST_CASE("rng streams")
    {
        Rng a{1, stream::input};
        Rng b{1, stream::input};
        Rng c{1, stream::direction};
        const auto x = a.bits();
        CHECK(x == b.bits());
        CHECK(x != c.bits());
        Rng u{3};
        for (int i = 0; i < 10000; ++i) {
            const double v = u.uniform();
            CHECK_FALSE((v < 0.0 || v >= 1.0));
        }
        CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
    }

    TEST_CASE("number formatting round trips")
    {
        Rng r{5};
        for (int i = 0; i < 2000; ++i) {
            const double v = (r.uniform() - 0.5) * std::pow(10.0, r.uniform(-30, 30));
            CHECK(parse_number(format_number(v)) == v);
        }
        CHECK(format_number(0.1) == "0.10000000000000001");
        CHECK(format_number(1.0) == "1");
        CHECK(parse_number(" +2.5 ") == 2.5);
        CHECK_THROWS_AS(parse_number("2.5x"), std::invalid_argument);
        CHECK_THROWS_AS(parse_number(""), std::invalid_argument);
        CHECK(parse_number_list("1, 2,3") == std::vector<double>{1, 2, 3});
    }
}
