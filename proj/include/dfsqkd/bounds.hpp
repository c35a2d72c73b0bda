#pragma once

// Decoy-state estimates of the single-pair yield S1 (lower bound) and error
// rate e1 (upper bound).

#include "dfsqkd/channel.hpp"
#include "dfsqkd/source.hpp"

#include <optional>
#include <stdexcept>
#include <string_view>

namespace dfsqkd {

class DegenerateIntensitiesError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class BoundUnavailableError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class ProtocolKind { three_intensity, two_intensity, no_decoy };

std::string_view to_string(ProtocolKind kind);

/// Signal intensity plus optional weaker decoy (and vacuum for three_intensity).
class DecoyProtocol {
public:
    static DecoyProtocol three_intensity(PairIntensity signal, PairIntensity decoy);
    static DecoyProtocol two_intensity(PairIntensity signal, PairIntensity decoy);
    static DecoyProtocol no_decoy(PairIntensity signal);
    /// decoy is ignored for no_decoy.
    static DecoyProtocol make(ProtocolKind kind, PairIntensity signal, PairIntensity decoy);

    ProtocolKind kind() const noexcept { return kind_; }
    PairIntensity signal() const noexcept { return signal_; }
    /// Zero for no_decoy.
    PairIntensity decoy() const noexcept { return decoy_; }

private:
    DecoyProtocol(ProtocolKind kind, PairIntensity signal, PairIntensity decoy);

    ProtocolKind kind_;
    PairIntensity signal_;
    PairIntensity decoy_;
};

/// A bound after clamping to its physical range, with the raw value kept.
struct ClampedBound {
    double value = 0.0;
    double raw = 0.0;
    bool clamped = false;
};

inline constexpr double kDegenerateDenominator = 1e-30;

ClampedBound s1_lower_three(const ObservedStatistics& signal, const ObservedStatistics& decoy, double s0);
ClampedBound e1_upper_three(const ObservedStatistics& signal, double s0, double s1_lower);
double s0_upper_two(const ObservedStatistics& signal);
ClampedBound s1_lower_two(const ObservedStatistics& signal, const ObservedStatistics& decoy);
ClampedBound e1_upper_two(const ObservedStatistics& signal, double s1_lower);
ClampedBound s1_lower_none(const ObservedStatistics& signal);

struct DecoyBounds {
    ClampedBound s1_lower;
    /// Unavailable (value 0.5, raw NaN) when s1_lower.value <= 0.
    ClampedBound e1_upper;
    double s0_used = 0.0;
    ProtocolKind method = ProtocolKind::three_intensity;
    bool available = false;  ///< s1_lower > 0 so the single-pair term can contribute
};

/// `decoy` is required for the decoy protocols; `vacuum_yield` for three_intensity.
DecoyBounds estimate_bounds(const DecoyProtocol& protocol, const ObservedStatistics& signal,
                            const std::optional<ObservedStatistics>& decoy,
                            std::optional<double> vacuum_yield);

}  // namespace dfsqkd
