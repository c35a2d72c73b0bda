#include "dfsqkd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dfsqkd {

std::string_view to_string(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::three_intensity: return "three_intensity";
        case ProtocolKind::two_intensity: return "two_intensity";
        case ProtocolKind::no_decoy: return "no_decoy";
    }
    return "?";
}

DecoyProtocol::DecoyProtocol(ProtocolKind kind, PairIntensity signal, PairIntensity decoy)
    : kind_(kind), signal_(signal), decoy_(decoy) {
    if (kind == ProtocolKind::no_decoy) {
        decoy_ = PairIntensity{};
        if (signal.value() <= 0.0) throw std::invalid_argument("signal intensity must be > 0");
        return;
    }
    if (!(signal.value() > decoy.value() && decoy.value() > 0.0)) {
        throw std::invalid_argument("decoy protocols need signal > decoy > 0, got " +
                                    std::to_string(signal.value()) + " and " +
                                    std::to_string(decoy.value()));
    }
}

DecoyProtocol DecoyProtocol::three_intensity(PairIntensity signal, PairIntensity decoy) {
    return {ProtocolKind::three_intensity, signal, decoy};
}

DecoyProtocol DecoyProtocol::two_intensity(PairIntensity signal, PairIntensity decoy) {
    return {ProtocolKind::two_intensity, signal, decoy};
}

DecoyProtocol DecoyProtocol::no_decoy(PairIntensity signal) {
    return {ProtocolKind::no_decoy, signal, PairIntensity{}};
}

DecoyProtocol DecoyProtocol::make(ProtocolKind kind, PairIntensity signal, PairIntensity decoy) {
    return {kind, signal, decoy};
}

namespace {

ClampedBound clamp(double raw, double lo, double hi) {
    const double v = std::clamp(raw, lo, hi);
    return {v, raw, v != raw};
}

void require_ordered(const ObservedStatistics& signal, const ObservedStatistics& decoy) {
    if (!(signal.lambda.value() > decoy.lambda.value() && decoy.lambda.value() > 0.0)) {
        throw std::invalid_argument("decoy bounds need signal intensity > decoy intensity > 0");
    }
}

// S1 lower bound from the multi-pair dominance of the signal over the decoy,
// with the vacuum contribution s0 subtracted.
double s1_lower_raw(const ObservedStatistics& signal, const ObservedStatistics& decoy, double s0) {
    const auto l = signal.lambda;
    const auto ld = decoy.lambda;
    const double p0 = pair_probability(l, 0), p1 = pair_probability(l, 1), p2 = pair_probability(l, 2);
    const double p0d = pair_probability(ld, 0), p1d = pair_probability(ld, 1), p2d = pair_probability(ld, 2);
    const double denom = p2 * p1d - p2d * p1;
    if (std::abs(denom) < kDegenerateDenominator) {
        throw DegenerateIntensitiesError("signal and decoy intensities are too close to separate S1");
    }
    return ((p2d * p0 - p2 * p0d) * s0 + p2 * decoy.gain - p2d * signal.gain) / denom;
}

ClampedBound e1_from(double numerator, const ObservedStatistics& signal, double s1_lower) {
    if (!(s1_lower > 0.0)) {
        throw BoundUnavailableError("single-pair yield bound is not positive");
    }
    return clamp(numerator / (pair_probability(signal.lambda, 1) * s1_lower), 0.0, 0.5);
}

}  // namespace

ClampedBound s1_lower_three(const ObservedStatistics& signal, const ObservedStatistics& decoy, double s0) {
    require_ordered(signal, decoy);
    if (!(s0 >= 0.0 && s0 <= 1.0)) throw std::invalid_argument("vacuum yield must lie in [0,1]");
    return clamp(s1_lower_raw(signal, decoy, s0), 0.0, 1.0);
}

ClampedBound e1_upper_three(const ObservedStatistics& signal, double s0, double s1_lower) {
    const double numerator = signal.error_gain() - s0 * pair_probability(signal.lambda, 0) / 2.0;
    return e1_from(numerator, signal, s1_lower);
}

double s0_upper_two(const ObservedStatistics& signal) {
    return 2.0 * signal.error_gain() / pair_probability(signal.lambda, 0);
}

ClampedBound s1_lower_two(const ObservedStatistics& signal, const ObservedStatistics& decoy) {
    require_ordered(signal, decoy);
    // The s0 coefficient is negative for signal > decoy, so the upper bound
    // on s0 is the worst case.
    return clamp(s1_lower_raw(signal, decoy, s0_upper_two(signal)), 0.0, 1.0);
}

ClampedBound e1_upper_two(const ObservedStatistics& signal, double s1_lower) {
    return e1_from(signal.error_gain(), signal, s1_lower);
}

ClampedBound s1_lower_none(const ObservedStatistics& signal) {
    const auto l = signal.lambda;
    const double p0 = pair_probability(l, 0);
    const double p1 = pair_probability(l, 1);
    const double raw = (signal.gain * (1.0 - 2.0 * signal.qber) - (1.0 - p0 - p1)) / p1;
    return clamp(raw, 0.0, 1.0);
}

DecoyBounds estimate_bounds(const DecoyProtocol& protocol, const ObservedStatistics& signal,
                            const std::optional<ObservedStatistics>& decoy,
                            std::optional<double> vacuum_yield) {
    if (signal.lambda != protocol.signal()) {
        throw std::invalid_argument("signal observation does not match the protocol intensity");
    }
    if (protocol.kind() != ProtocolKind::no_decoy && (!decoy || decoy->lambda != protocol.decoy())) {
        throw std::invalid_argument("decoy observation missing or at the wrong intensity");
    }

    DecoyBounds b;
    b.method = protocol.kind();
    switch (protocol.kind()) {
        case ProtocolKind::three_intensity:
            if (!vacuum_yield) throw std::invalid_argument("three-intensity bounds need the vacuum yield");
            b.s0_used = *vacuum_yield;
            b.s1_lower = s1_lower_three(signal, *decoy, b.s0_used);
            break;
        case ProtocolKind::two_intensity:
            b.s0_used = s0_upper_two(signal);
            b.s1_lower = s1_lower_two(signal, *decoy);
            break;
        case ProtocolKind::no_decoy:
            b.s0_used = s0_upper_two(signal);
            b.s1_lower = s1_lower_none(signal);
            break;
    }

    b.available = b.s1_lower.value > 0.0;
    if (!b.available) {
        b.e1_upper = {0.5, std::numeric_limits<double>::quiet_NaN(), true};
        return b;
    }
    // Without a vacuum measurement only S0 >= 0 is known.
    b.e1_upper = protocol.kind() == ProtocolKind::three_intensity
                     ? e1_upper_three(signal, b.s0_used, b.s1_lower.value)
                     : e1_upper_two(signal, b.s1_lower.value);
    return b;
}

}  // namespace dfsqkd
