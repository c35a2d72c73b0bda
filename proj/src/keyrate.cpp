#include "dfsqkd/keyrate.hpp"

#include "dfsqkd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dfsqkd {

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("binary entropy argument outside [0,1]: " + std::to_string(x));
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

ProtocolConstants ProtocolConstants::with_constant_f(double q, double f) {
    ProtocolConstants c;
    c.q = q;
    c.f = [f](double) { return f; };
    c.validate();
    return c;
}

void ProtocolConstants::validate() const {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("sifting factor q must lie in (0, 1]");
    if (!f) throw std::invalid_argument("error-correction efficiency is not set");
    if (!(f(0.0) >= 1.0)) throw std::invalid_argument("error-correction inefficiency f must be >= 1");
}

RateValue gllp_rate(const ObservedStatistics& signal, const DecoyBounds& bounds,
                    const ProtocolConstants& consts) {
    const double f = consts.f(signal.qber);
    if (!(f >= 1.0)) throw std::domain_error("error-correction inefficiency f(E) must be >= 1");
    const double leak = signal.gain * f * binary_entropy(signal.qber);
    double single = 0.0;
    if (bounds.available) {
        single = pair_probability(signal.lambda, 1) * bounds.s1_lower.value *
                 (1.0 - binary_entropy(bounds.e1_upper.value));
    }
    RateValue r;
    r.raw = consts.q * (single - leak);
    r.floored = !bounds.available || !(r.raw > 0.0);
    r.value = r.floored ? 0.0 : r.raw;
    return r;
}

// ---------------------------------------------------------------------------

RateModel::RateModel(DecoyProtocol protocol, ChannelModel channel, ProtocolConstants consts)
    : protocol_(protocol),
      channel_(channel),
      consts_(std::move(consts)),
      signal_dist_(PairDistribution::build(protocol.signal(), channel.tail_bound)),
      decoy_dist_(PairDistribution::build(protocol.decoy(), channel.tail_bound)) {
    consts_.validate();
    channel_.at(0.0);  // validates k and D
}

KeyRatePoint RateModel::at(double length_km) const {
    const ChannelParams params = channel_.at(length_km);
    const auto signal = observed_series(protocol_.signal(), params, signal_dist_, channel_.variant);
    std::optional<ObservedStatistics> decoy;
    std::optional<double> vacuum;
    if (protocol_.kind() != ProtocolKind::no_decoy) {
        decoy = observed_series(protocol_.decoy(), params, decoy_dist_, channel_.variant);
    }
    if (protocol_.kind() == ProtocolKind::three_intensity) vacuum = yield_n(params, 0);

    const auto bounds = estimate_bounds(protocol_, signal, decoy, vacuum);
    return {length_km, protocol_, signal, bounds, gllp_rate(signal, bounds, consts_)};
}

std::vector<KeyRatePoint> RateModel::sweep(std::span<const double> lengths_km) const {
    return parallel_map(lengths_km.size(), [&](std::size_t i) { return at(lengths_km[i]); });
}

SecureDistance max_secure_distance(const RateModel& model, const DistanceSearch& search) {
    if (!(search.coarse_step_km > 0.0 && search.resolution_km > 0.0 && search.max_length_km > 0.0)) {
        throw std::invalid_argument("distance search steps must be positive");
    }
    auto positive = [&](double length) { return !model.at(length).rate.floored; };

    SecureDistance out;
    if (!positive(0.0)) return out;
    out.exists = true;

    const auto steps = static_cast<std::size_t>(std::floor(search.max_length_km / search.coarse_step_km));
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) grid[i] = static_cast<double>(i) * search.coarse_step_km;
    const auto sweep = model.sweep(grid);

    std::size_t last_positive = 0;
    std::size_t turn_offs = 0;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        const bool now = !sweep[i].rate.floored;
        const bool before = !sweep[i - 1].rate.floored;
        if (before && !now) ++turn_offs;
        if (now) last_positive = i;
    }
    if (turn_offs > 1) {
        throw std::runtime_error("key rate changes sign more than once along the distance scan");
    }
    if (last_positive == steps) {
        out.length_km = grid.back();
        out.hit_scan_limit = true;
        return out;
    }

    double lo = grid[last_positive];
    double hi = grid[last_positive + 1];
    while (hi - lo > search.resolution_km) {
        const double mid = 0.5 * (lo + hi);
        (positive(mid) ? lo : hi) = mid;
    }
    out.length_km = lo;
    return out;
}

double pns_limit_distance(PairIntensity lambda, double loss_db_per_km, double attack_success) {
    if (!(lambda.value() > 0.0)) throw std::invalid_argument("PNS limit needs lambda > 0");
    if (!(loss_db_per_km > 0.0)) throw std::invalid_argument("PNS limit needs a positive fiber loss");
    if (!(attack_success >= 0.0 && attack_success <= 1.0)) {
        throw std::invalid_argument("attack success probability must lie in [0,1]");
    }
    if (attack_success == 0.0) return std::numeric_limits<double>::infinity();
    const double eta_squared = attack_success * pair_probability(lambda, 2) / pair_probability(lambda, 1);
    // eta^2 = 10^(-kL/5)
    return std::max(0.0, -5.0 / loss_db_per_km * std::log10(eta_squared));
}

IntensityOptimum optimize_intensities(ProtocolKind kind, const ChannelModel& channel,
                                      const ProtocolConstants& consts, double length_km,
                                      std::span<const std::pair<double, double>> grid) {
    std::vector<std::pair<double, double>> feasible;
    for (const auto& [l, lp] : grid) {
        const bool ok = kind == ProtocolKind::no_decoy ? l > 0.0 : (l > lp && lp > 0.0);
        if (ok) feasible.emplace_back(l, kind == ProtocolKind::no_decoy ? 0.0 : lp);
    }
    std::sort(feasible.begin(), feasible.end());
    feasible.erase(std::unique(feasible.begin(), feasible.end()), feasible.end());
    if (feasible.empty()) throw std::invalid_argument("no admissible (lambda, lambda') pair in the grid");

    auto points = parallel_map(feasible.size(), [&](std::size_t i) {
        const auto protocol =
            DecoyProtocol::make(kind, PairIntensity(feasible[i].first), PairIntensity(feasible[i].second));
        return RateModel(protocol, channel, consts).at(length_km);
    });

    IntensityOptimum best;
    best.evaluated = points.size();
    for (auto& p : points) {
        if (p.rate.floored) continue;
        if (!best.best || p.rate.value > best.best->rate.value) best.best = std::move(p);
    }
    return best;
}

}  // namespace dfsqkd
