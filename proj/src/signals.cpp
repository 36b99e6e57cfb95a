#include "critesn/signals.hpp"

#include "critesn/csv.hpp"
#include "critesn/rng.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <stdexcept>

namespace critesn {

std::string_view to_string(SignalKind k) noexcept
{
    switch (k) {
    case SignalKind::Alternating: return "alternating";
    case SignalKind::Constant: return "constant";
    case SignalKind::IidPlusMinus: return "iid";
    case SignalKind::FromFile: return "file";
    }
    return "?";
}

SignalKind parse_signal_kind(std::string_view text)
{
    if (text == "alternating") return SignalKind::Alternating;
    if (text == "constant") return SignalKind::Constant;
    if (text == "iid") return SignalKind::IidPlusMinus;
    if (text == "file") return SignalKind::FromFile;
    throw std::invalid_argument(fmt::format("unknown input kind '{}'", text));
}

std::vector<double> read_sequence_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("input file '{}' not found", path.string()));
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        values.push_back(parse_number(line));
    }
    return values;
}

std::vector<double> generate(const InputSequence& seq)
{
    if (seq.length < 1) throw std::invalid_argument("input length must be at least 1");
    if (!std::isfinite(seq.amplitude)) throw std::invalid_argument("input amplitude must be finite");
    if (!(seq.gamma > 0.0) || !std::isfinite(seq.gamma)) throw std::invalid_argument("gamma must be positive");

    std::vector<double> u(seq.length);
    switch (seq.kind) {
    case SignalKind::Alternating:
        for (std::size_t t = 0; t < u.size(); ++t) u[t] = t % 2 == 0 ? seq.amplitude : -seq.amplitude;
        break;
    case SignalKind::Constant:
        for (auto& v : u) v = seq.amplitude;
        break;
    case SignalKind::IidPlusMinus: {
        Rng rng{seq.seed, stream::input};
        for (auto& v : u) v = seq.amplitude * rng.sign();
        break;
    }
    case SignalKind::FromFile: {
        const auto values = read_sequence_file(seq.path);
        if (values.size() < seq.length)
            throw std::runtime_error(fmt::format(
              "input file '{}' holds {} values, {} requested", seq.path.string(), values.size(), seq.length));
        for (std::size_t t = 0; t < u.size(); ++t) u[t] = seq.amplitude * values[t];
        break;
    }
    }
    if (seq.gamma != 1.0)
        for (auto& v : u) v *= seq.gamma;
    return u;
}

std::string sequence_to_csv(std::span<const double> values)
{
    std::string out = "t,u\n";
    for (std::size_t t = 0; t < values.size(); ++t) out += fmt::format("{},{}\n", t, format_number(values[t]));
    return out;
}

}  // namespace critesn
