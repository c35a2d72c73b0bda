#include "dfsqkd/source.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dfsqkd {

PairIntensity::PairIntensity(double lambda) : value_(lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw std::invalid_argument("pair intensity must be finite and >= 0, got " +
                                    std::to_string(lambda));
    }
}

double pair_probability(PairIntensity lambda, std::size_t n) {
    const double l = lambda.value();
    if (l == 0.0) return n == 0 ? 1.0 : 0.0;
    const auto nd = static_cast<double>(n);
    if (n < 64) {
        return (nd + 1.0) * std::pow(l, nd) / std::pow(1.0 + l, nd + 2.0);
    }
    // lambda^n underflows long before the ratio does
    const double log_p = std::log(nd + 1.0) + nd * std::log(l) - (nd + 2.0) * std::log1p(l);
    return std::exp(log_p);
}

double pair_tail(PairIntensity lambda, std::size_t n) {
    // sum_{m>=M} (m+1) x^m = x^M (M+1 - M x) / (1-x)^2 with x = l/(1+l),
    // and (1-x)^2 (1+l)^2 = 1.
    const double l = lambda.value();
    if (l == 0.0) return 0.0;
    const double x = l / (1.0 + l);
    const auto m = static_cast<double>(n) + 1.0;
    const double log_xm = m * std::log(x);
    return std::exp(log_xm) * ((m + 1.0) - m * x);
}

double multi_pair_dominance_gap(PairIntensity lambda, PairIntensity lambda_prime, std::size_t n) {
    const double p2_ratio = pair_probability(lambda, 2) / pair_probability(lambda_prime, 2);
    return pair_probability(lambda, n) - p2_ratio * pair_probability(lambda_prime, n);
}

PairDistribution PairDistribution::build(PairIntensity lambda, double tail_bound,
                                         std::size_t max_terms) {
    if (!(tail_bound > 0.0 && tail_bound < 1.0)) {
        throw std::invalid_argument("tail bound must lie in (0, 1)");
    }
    std::vector<double> p;
    for (std::size_t n = 0;; ++n) {
        if (n > max_terms) {
            throw std::range_error("pair intensity " + std::to_string(lambda.value()) +
                                   " needs more than " + std::to_string(max_terms) +
                                   " terms to reach the tail bound");
        }
        p.push_back(pair_probability(lambda, n));
        const double tail = pair_tail(lambda, n);
        if (tail <= tail_bound) return PairDistribution(lambda, std::move(p), tail);
    }
}

double PairDistribution::total() const noexcept {
    return std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
}

double PairDistribution::mean_pairs() const noexcept {
    double mean = 0.0;
    for (std::size_t n = 1; n < probabilities_.size(); ++n) {
        mean += static_cast<double>(n) * probabilities_[n];
    }
    return mean;
}

}  // namespace dfsqkd
