#pragma once

// GLLP key-rate lower bound, secure-distance search and intensity search.

#include "dfsqkd/bounds.hpp"
#include "dfsqkd/channel.hpp"
#include "dfsqkd/source.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace dfsqkd {

/// H2(x); throws std::domain_error outside [0,1].
double binary_entropy(double x);

struct ProtocolConstants {
    /// Sifting factor.
    double q = 0.5;
    /// Error-correction inefficiency as a function of the QBER.
    std::function<double(double)> f = [](double) { return 1.2; };

    static ProtocolConstants with_constant_f(double q, double f);
    void validate() const;
};

struct RateValue {
    double value = 0.0;  ///< floored at 0
    double raw = 0.0;
    bool floored = false;
};

RateValue gllp_rate(const ObservedStatistics& signal, const DecoyBounds& bounds,
                    const ProtocolConstants& consts);

/// Channel and detector settings shared by every distance of a sweep.
struct ChannelModel {
    double loss_db_per_km = 0.2;
    double dark_count = 1e-6;
    DarkCountTerm variant = kDefaultDarkCountTerm;
    double tail_bound = kDefaultTailBound;

    ChannelParams at(double length_km) const { return {loss_db_per_km, length_km, dark_count}; }
};

struct KeyRatePoint {
    double length_km = 0.0;
    DecoyProtocol protocol;
    ObservedStatistics signal;
    DecoyBounds bounds;
    RateValue rate;
};

/// Simulated observations plus bound extraction for one protocol. Immutable
/// and safe to evaluate from several threads.
class RateModel {
public:
    RateModel(DecoyProtocol protocol, ChannelModel channel, ProtocolConstants consts);

    KeyRatePoint at(double length_km) const;
    std::vector<KeyRatePoint> sweep(std::span<const double> lengths_km) const;

    const DecoyProtocol& protocol() const noexcept { return protocol_; }
    const ChannelModel& channel() const noexcept { return channel_; }

private:
    DecoyProtocol protocol_;
    ChannelModel channel_;
    ProtocolConstants consts_;
    PairDistribution signal_dist_;
    PairDistribution decoy_dist_;
};

struct DistanceSearch {
    double coarse_step_km = 1.0;
    double resolution_km = 0.01;
    double max_length_km = 500.0;
};

struct SecureDistance {
    bool exists = false;
    double length_km = 0.0;      ///< last distance with a positive rate
    bool hit_scan_limit = false;  ///< rate still positive at max_length_km
};

/// Largest L with a positive rate: coarse scan then bisection. Throws
/// std::runtime_error if the rate turns positive again after vanishing.
SecureDistance max_secure_distance(const RateModel& model, const DistanceSearch& search = {});

/// Root of P1(lambda) eta^2 = attack_success P2(lambda), eta = 10^(-kL/10).
/// +infinity when attack_success == 0; 0 when the source is insecure at L=0.
double pns_limit_distance(PairIntensity lambda, double loss_db_per_km, double attack_success = 0.30);

struct IntensityOptimum {
    /// Empty when no grid point gives a positive rate.
    std::optional<KeyRatePoint> best;
    std::size_t evaluated = 0;

    bool found() const noexcept { return best.has_value(); }
};

/// Exhaustive search over (lambda, lambda') pairs at a fixed length. Ties go
/// to the smaller lambda, then the smaller lambda'. Throws
/// std::invalid_argument if no grid pair is admissible for the protocol kind.
IntensityOptimum optimize_intensities(ProtocolKind kind, const ChannelModel& channel,
                                      const ProtocolConstants& consts, double length_km,
                                      std::span<const std::pair<double, double>> grid);

}  // namespace dfsqkd
