#pragma once

// Photon-pair statistics of a phase-randomized type-II down-conversion source.

#include <cstddef>
#include <span>
#include <vector>

namespace dfsqkd {

/// Half the mean number of photon pairs per pump pulse. Zero is a valid
/// intensity (vacuum decoy).
class PairIntensity {
public:
    constexpr PairIntensity() = default;
    explicit PairIntensity(double lambda);

    double value() const noexcept { return value_; }

    friend auto operator<=>(const PairIntensity&, const PairIntensity&) = default;

private:
    double value_ = 0.0;
};

/// P_n(lambda) = (n+1) lambda^n / (1+lambda)^(n+2).
double pair_probability(PairIntensity lambda, std::size_t n);

/// Exact tail sum_{m > n} P_m(lambda).
double pair_tail(PairIntensity lambda, std::size_t n);

/// P_n(lambda) - P_2(lambda)/P_2(lambda') * P_n(lambda'); nonnegative for
/// lambda > lambda' > 0 and n >= 2.
double multi_pair_dominance_gap(PairIntensity lambda, PairIntensity lambda_prime, std::size_t n);

inline constexpr double kDefaultTailBound = 1e-12;
inline constexpr std::size_t kDefaultMaxTerms = 10000;

class PairDistribution {
public:
    /// Smallest truncation whose exact tail is <= tail_bound. Throws
    /// std::invalid_argument for a bad tail bound and std::range_error when
    /// the truncation would exceed max_terms.
    static PairDistribution build(PairIntensity lambda, double tail_bound = kDefaultTailBound,
                                  std::size_t max_terms = kDefaultMaxTerms);

    PairIntensity intensity() const noexcept { return lambda_; }
    std::size_t truncation() const noexcept { return probabilities_.size() - 1; }
    std::span<const double> probabilities() const noexcept { return probabilities_; }
    double operator[](std::size_t n) const { return probabilities_.at(n); }

    double tail() const noexcept { return tail_; }
    double total() const noexcept;
    double mean_pairs() const noexcept;

private:
    PairDistribution(PairIntensity lambda, std::vector<double> p, double tail)
        : lambda_(lambda), probabilities_(std::move(p)), tail_(tail) {}

    PairIntensity lambda_;
    std::vector<double> probabilities_;
    double tail_ = 0.0;
};

}  // namespace dfsqkd
