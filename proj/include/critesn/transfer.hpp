#pragma once

// Morphable transfer functions anchored on tanh at epi-critical points (ECPs). //

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace critesn {

/// Minimum distance between two ECPs.
inline constexpr double min_ecp_spacing = 1e-6;

/// Sorted, validated list of ECP abscissae. Always contains 0.
class EcpList {
public:
    /// Sorts the values, inserts 0 when absent and checks finiteness and spacing.
    /// Throws std::invalid_argument on violation.
    explicit EcpList(std::vector<double> points);

    /// The list {0}.
    EcpList();

    const std::vector<double>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    double front() const noexcept { return points_.front(); }
    double back() const noexcept { return points_.back(); }
    double operator[](std::size_t i) const { return points_[i]; }

    /// Comma separated, 17 significant digits.
    std::string to_string() const;
    /// Parses "a,b,c" (whitespace tolerated).
    static EcpList parse(std::string_view text);

    friend bool operator==(const EcpList&, const EcpList&) = default;

private:
    std::vector<double> points_;
};

enum class TransferVariant {
    Plateau,  ///< zero-slope plateau between adjacent ECPs
    Bridge    ///< strictly increasing C1 bridge between adjacent ECPs
};

std::string_view to_string(TransferVariant v) noexcept;
/// Accepts "plateau" or "bridge". Throws std::invalid_argument otherwise.
TransferVariant parse_variant(std::string_view text);

/// One analytic piece of the transfer function on [lo, next piece lo).
///
/// value(x) = level + scale * tanh((x - anchor) / scale), or the constant `level`
/// when scale == 0. scale == 1 gives the tanh branch through the ECP `anchor`.
struct TransferPiece {
    double lo;
    double anchor;
    double level;
    double scale;

    double value(double x) const noexcept;
    double slope(double x) const noexcept;
};

/// Row of transfer sampling output.
struct TransferSample {
    double x;
    double theta;
    double slope;
};

/// Piecewise transfer function. Immutable after construction.
class MorphableTransfer {
public:
    MorphableTransfer(EcpList ecps, TransferVariant variant);

    /// Plain tanh, i.e. the single ECP at the origin.
    static MorphableTransfer tanh();

    double eval(double x) const noexcept { return piece_at(x).value(x); }
    /// Right-sided slope at piece boundaries.
    double slope(double x) const noexcept { return piece_at(x).slope(x); }

    /// n evenly spaced rows over [lo, hi] with exact endpoints.
    std::vector<TransferSample> sample(double lo, double hi, std::size_t n) const;

    const EcpList& ecps() const noexcept { return ecps_; }
    TransferVariant variant() const noexcept { return variant_; }
    std::span<const TransferPiece> pieces() const noexcept { return pieces_; }
    /// Interior piece boundaries (ECPs, plateau ends, bridge midpoints).
    std::vector<double> breakpoints() const;

private:
    const TransferPiece& piece_at(double x) const noexcept;

    EcpList ecps_;
    TransferVariant variant_;
    std::vector<TransferPiece> pieces_;
};

using TransferPtr = std::shared_ptr<const MorphableTransfer>;

/// The tanh branch through the ECP p: tanh(x - p) + tanh(p).
double ecp_branch(double p, double x) noexcept;

/// sech^2 without underflow for moderate arguments; never exceeds 1.
double sech2(double z) noexcept;

struct TransferViolation {
    std::string what;
    double x;
    double value;
};

struct ValidationReport {
    std::vector<TransferViolation> violations;
    std::size_t points_checked = 0;

    bool ok() const noexcept { return violations.empty(); }
};

/// Dense grid check of the transfer invariants over [ecp_min - 5, ecp_max + 5].
/// grid_step must lie in (0, 1e-2]; throws std::invalid_argument otherwise.
ValidationReport validate(const MorphableTransfer& f, double grid_step);

/// CSV with header `x,theta,slope`.
std::string samples_to_csv(std::span<const TransferSample> rows);

}  // namespace critesn
