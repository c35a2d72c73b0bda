#include "dfsqkd/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dfsqkd {

ChannelParams::ChannelParams(double loss_db_per_km, double length_km, double dark_count)
    : k_(loss_db_per_km), length_(length_km), dark_(dark_count) {
    if (!std::isfinite(k_) || k_ < 0.0) throw std::invalid_argument("fiber loss must be >= 0");
    if (!std::isfinite(length_) || length_ < 0.0) throw std::invalid_argument("fiber length must be >= 0");
    if (!(dark_ >= 0.0 && dark_ < 1.0)) throw std::invalid_argument("dark-count probability must lie in [0, 1)");
    if (transmittance() <= 0.0) throw std::invalid_argument("channel transmittance underflows to zero");
}

double ChannelParams::transmittance() const noexcept {
    return std::pow(10.0, -k_ * length_ / 10.0);
}

double multi_photon_transmittance(double eta, std::size_t n) {
    if (n == 0) return 0.0;
    if (eta >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-eta));
}

std::string_view to_string(DarkCountTerm v) {
    return v == DarkCountTerm::as_printed ? "as_printed" : "squared_dark";
}

DarkCountTerm parse_dark_count_term(std::string_view text) {
    if (text == "as_printed") return DarkCountTerm::as_printed;
    if (text == "squared_dark") return DarkCountTerm::squared_dark;
    throw std::invalid_argument("unknown eq20 variant '" + std::string(text) +
                                "' (expected as_printed or squared_dark)");
}

namespace {

// Term m of an n-pair emission puts n-m photons on one detector of each port
// and m on the other.
struct PortTerm {
    double first_only;   // only the (n-m)-photon detector is hit
    double second_only;  // only the m-photon detector is hit
};

PortTerm port_term(double eta, std::size_t n, std::size_t m) {
    const double loss = 1.0 - eta;
    return {multi_photon_transmittance(eta, n - m) * std::pow(loss, static_cast<double>(m)),
            multi_photon_transmittance(eta, m) * std::pow(loss, static_cast<double>(n - m))};
}

}  // namespace

double yield_n(const ChannelParams& params, std::size_t n) {
    const double eta = params.transmittance();
    const double d = params.dark_count();
    const double all_lost = std::pow(1.0 - eta, static_cast<double>(n));
    double sum = 0.0;
    for (std::size_t m = 0; m <= n; ++m) {
        const auto t = port_term(eta, n, m);
        const double single = t.first_only + t.second_only;
        sum += single * single + 4.0 * single * all_lost * d + 4.0 * all_lost * all_lost * d * d;
    }
    return (1.0 - d) * (1.0 - d) * sum / static_cast<double>(n + 1);
}

double error_yield_n(const ChannelParams& params, std::size_t n, DarkCountTerm variant) {
    const double eta = params.transmittance();
    const double d = params.dark_count();
    const double all_lost = std::pow(1.0 - eta, static_cast<double>(n));
    const double lost_term = variant == DarkCountTerm::squared_dark ? 2.0 * d * d : 2.0 * d;
    double sum = 0.0;
    for (std::size_t m = 0; m <= n; ++m) {
        const auto t = port_term(eta, n, m);
        sum += 2.0 * t.first_only * t.second_only + 2.0 * (t.first_only + t.second_only) * all_lost * d +
               all_lost * all_lost * lost_term;
    }
    return (1.0 - d) * (1.0 - d) * sum / static_cast<double>(n + 1);
}

YieldTable YieldTable::build(const ChannelParams& params, std::size_t max_n, DarkCountTerm variant) {
    YieldTable t;
    t.yield.reserve(max_n + 1);
    t.error_yield.reserve(max_n + 1);
    for (std::size_t n = 0; n <= max_n; ++n) {
        t.yield.push_back(yield_n(params, n));
        t.error_yield.push_back(error_yield_n(params, n, variant));
    }
    return t;
}

ObservedStatistics make_observation(PairIntensity lambda, double gain, double error_gain) {
    if (!(gain >= 0.0 && gain <= 1.0)) {
        throw std::domain_error("counting rate outside [0,1]: " + std::to_string(gain));
    }
    ObservedStatistics obs;
    obs.lambda = lambda;
    obs.gain = gain;
    if (gain == 0.0) {
        obs.zero_gain = true;
        return obs;
    }
    obs.qber = error_gain / gain;
    if (!(obs.qber >= 0.0 && obs.qber <= 1.0)) {
        throw std::domain_error("error rate outside [0,1]: " + std::to_string(obs.qber));
    }
    return obs;
}

ObservedStatistics observed_closed_form(PairIntensity lambda, const ChannelParams& params) {
    const double l = lambda.value();
    const double eta = params.transmittance();
    const double d = params.dark_count();
    const double le = l * eta;
    const double denom = 1.0 + le * (3.0 - eta) + le * le * (2.0 - eta);
    const double bracket = 4.0 * le * d * (1.0 - eta) * (1.0 + le) + 2.0 * d * d * (1.0 + le) * (1.0 + le) +
                           le * eta * (1.0 + l * le * (2.0 - eta) + l * (eta * eta - 2.0 * eta + 3.0));
    const double q = 2.0 * (1.0 - d) * (1.0 - d) * bracket / (denom * denom);
    const double err = d + l * d * eta + le * (1.0 - eta);
    const double eq = 2.0 * (1.0 - d) * (1.0 - d) * err * err / (denom * denom);
    return make_observation(lambda, q, eq);
}

ObservedStatistics observed_series(PairIntensity lambda, const ChannelParams& params,
                                   const PairDistribution& dist, DarkCountTerm variant) {
    if (dist.intensity() != lambda) {
        throw std::invalid_argument("pair distribution was built for a different intensity");
    }
    double q = 0.0;
    double eq = 0.0;
    const auto p = dist.probabilities();
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (p[n] == 0.0) continue;
        q += p[n] * yield_n(params, n);
        eq += p[n] * error_yield_n(params, n, variant);
    }
    return make_observation(lambda, q, eq);
}

}  // namespace dfsqkd
