#pragma once

// Deterministic input sequences. //

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace critesn {

enum class SignalKind {
    Alternating,   ///< amplitude * (-1)^t, element 0 positive
    Constant,      ///< amplitude
    IidPlusMinus,  ///< amplitude * fair +-1
    FromFile       ///< one decimal per line, times amplitude
};

std::string_view to_string(SignalKind k) noexcept;
/// Accepts "alternating", "constant", "iid", "file".
SignalKind parse_signal_kind(std::string_view text);

/// Recipe for a finite input realization. gamma != 1 makes it the scaled sequence
/// gamma * base; gamma == 1 reproduces the base sequence bit for bit.
struct InputSequence {
    SignalKind kind = SignalKind::Alternating;
    double amplitude = 1.0;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    std::size_t length = 1;
    std::filesystem::path path;  ///< FromFile only
};

/// Materializes the sequence. Throws std::invalid_argument for invalid specs and
/// std::runtime_error when a FromFile source cannot be read or is too short.
std::vector<double> generate(const InputSequence& seq);

/// Reads one value per line; blank lines are skipped.
std::vector<double> read_sequence_file(const std::filesystem::path& path);

/// CSV with header `t,u`.
std::string sequence_to_csv(std::span<const double> values);

}  // namespace critesn
