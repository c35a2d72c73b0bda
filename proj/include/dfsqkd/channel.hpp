#pragma once

// Bob's coincidence statistics through lossy fiber with dark counts.

#include "dfsqkd/source.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace dfsqkd {

/// Fiber loss k (dB/km), length L (km) and per-detector dark-count
/// probability D. Detector efficiency is folded into the fiber loss.
class ChannelParams {
public:
    ChannelParams(double loss_db_per_km, double length_km, double dark_count);

    double loss_db_per_km() const noexcept { return k_; }
    double length_km() const noexcept { return length_; }
    double dark_count() const noexcept { return dark_; }
    /// 10^(-kL/10)
    double transmittance() const noexcept;

    ChannelParams at_length(double length_km) const { return {k_, length_km, dark_}; }

private:
    double k_;
    double length_;
    double dark_;
};

/// 1 - (1 - eta)^n
double multi_photon_transmittance(double eta, std::size_t n);

/// How the error yield weights the "every photon lost" branch. The printed
/// form carries a single power of D; the squared form charges both dark
/// clicks and is the one consistent with the closed-form QBER.
enum class DarkCountTerm { as_printed, squared_dark };

inline constexpr DarkCountTerm kDefaultDarkCountTerm = DarkCountTerm::squared_dark;

std::string_view to_string(DarkCountTerm v);
DarkCountTerm parse_dark_count_term(std::string_view text);

/// S_n: probability of a valid two-fold coincidence from an n-pair emission.
double yield_n(const ChannelParams& params, std::size_t n);

/// e_n S_n
double error_yield_n(const ChannelParams& params, std::size_t n,
                     DarkCountTerm variant = kDefaultDarkCountTerm);

struct YieldTable {
    std::vector<double> yield;        ///< S_n
    std::vector<double> error_yield;  ///< e_n S_n

    static YieldTable build(const ChannelParams& params, std::size_t max_n,
                            DarkCountTerm variant = kDefaultDarkCountTerm);
};

struct ObservedStatistics {
    double gain = 0.0;  ///< Q
    double qber = 0.0;  ///< E, reported as 0 when gain == 0
    PairIntensity lambda;
    bool zero_gain = false;

    double error_gain() const noexcept { return gain * qber; }
};

/// Builds statistics from Q and E*Q; rejects values outside [0,1].
ObservedStatistics make_observation(PairIntensity lambda, double gain, double error_gain);

/// Closed-form Q and E of the full pair distribution.
ObservedStatistics observed_closed_form(PairIntensity lambda, const ChannelParams& params);

/// Q = sum P_n S_n and E Q = sum P_n e_n S_n over the truncated distribution.
ObservedStatistics observed_series(PairIntensity lambda, const ChannelParams& params,
                                   const PairDistribution& dist,
                                   DarkCountTerm variant = kDefaultDarkCountTerm);

}  // namespace dfsqkd
