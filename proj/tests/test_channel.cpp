#include "dfsqkd/channel.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace dfsqkd;

namespace {

bool rel_close(double got, double want, double tol) { return std::abs(got - want) <= tol * std::abs(want); }

}  // namespace

TEST_CASE("channel parameters are validated") {
    CHECK_NOTHROW(ChannelParams(0.2, 0.0, 0.0));
    CHECK_THROWS_AS(ChannelParams(-0.2, 1.0, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(0.2, -1.0, 1e-6), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(0.2, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(0.2, 1.0, -1e-9), std::invalid_argument);
    CHECK_THROWS_AS(ChannelParams(0.2, 1e6, 1e-6), std::invalid_argument);
}

TEST_CASE("transmittance") {
    CHECK(ChannelParams(0.2, 0.0, 1e-6).transmittance() == 1.0);
    CHECK(ChannelParams(0.2, 50.0, 1e-6).transmittance() == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(ChannelParams(0.2, 10.0, 1e-6).transmittance() == doctest::Approx(std::pow(10.0, -0.2)).epsilon(1e-14));
    CHECK(multi_photon_transmittance(0.3, 0) == 0.0);
    CHECK(multi_photon_transmittance(0.3, 1) == doctest::Approx(0.3));
    CHECK(multi_photon_transmittance(0.3, 3) == doctest::Approx(1.0 - 0.7 * 0.7 * 0.7));
    CHECK(multi_photon_transmittance(1e-12, 2) == doctest::Approx(2e-12).epsilon(1e-6));
}

TEST_CASE("variant names round-trip") {
    for (auto v : {DarkCountTerm::as_printed, DarkCountTerm::squared_dark}) {
        CHECK(parse_dark_count_term(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_dark_count_term("cubed"), std::invalid_argument);
}

TEST_CASE("yields match brute-force enumeration of photon losses and dark clicks") {
    for (double length : {0.0, 5.0, 30.0, 100.0}) {
        for (double dark : {0.0, 1e-6, 0.01, 0.2}) {
            const ChannelParams params(0.2, length, dark);
            for (unsigned n = 0; n <= 4; ++n) {
                CAPTURE(length);
                CAPTURE(dark);
                CAPTURE(n);
                const auto ref = oracle::enumerate_yields(params.transmittance(), dark, n);
                CHECK(rel_close(yield_n(params, n), ref.yield, 1e-12));
                CHECK(rel_close(error_yield_n(params, n, DarkCountTerm::squared_dark), ref.error_yield, 1e-12));
            }
        }
    }
}

TEST_CASE("printed dark-count weighting differs from enumeration only in the all-lost branch") {
    const ChannelParams params(0.2, 20.0, 1e-3);
    const double dark = params.dark_count();
    for (unsigned n = 0; n <= 4; ++n) {
        const double eta = params.transmittance();
        const double lost = std::pow(1.0 - eta, 2.0 * n);
        const double gap = error_yield_n(params, n, DarkCountTerm::as_printed) -
                           error_yield_n(params, n, DarkCountTerm::squared_dark);
        CHECK(gap == doctest::Approx(2.0 * (dark - dark * dark) * (1.0 - dark) * (1.0 - dark) * lost)
                         .epsilon(1e-10));
    }
}

TEST_CASE("printed weighting lets the vacuum error yield exceed the vacuum yield") {
    const ChannelParams params(0.2, 0.0, 1e-6);
    CHECK(yield_n(params, 0) == doctest::Approx(4e-12).epsilon(1e-5));
    CHECK(error_yield_n(params, 0, DarkCountTerm::as_printed) > yield_n(params, 0));
    CHECK(error_yield_n(params, 0, DarkCountTerm::squared_dark) <= yield_n(params, 0));
}

TEST_CASE("worked yields") {
    // lossless, noiseless: single pairs always give a correct coincidence
    const ChannelParams ideal(0.2, 0.0, 0.0);
    CHECK(yield_n(ideal, 0) == 0.0);
    CHECK(yield_n(ideal, 1) == doctest::Approx(1.0));
    CHECK(error_yield_n(ideal, 1) == 0.0);
    // two pairs: terms m = 0 and m = 2 are clean, m = 1 fires both detectors
    CHECK(yield_n(ideal, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(error_yield_n(ideal, 2) == 0.0);

    // dark-count floor: vacuum emission
    const double d = 1e-6;
    const ChannelParams dark_only(0.2, 10.0, d);
    CHECK(yield_n(dark_only, 0) == doctest::Approx(4 * d * d * (1 - d) * (1 - d)).epsilon(1e-12));
    CHECK(error_yield_n(dark_only, 0) == doctest::Approx(2 * d * d * (1 - d) * (1 - d)).epsilon(1e-12));
}

TEST_CASE("yield invariants over a grid") {
    for (double length : {0.0, 1.0, 10.0, 40.0, 80.0, 200.0}) {
        for (double dark : {0.0, 1e-6, 1e-4, 0.05}) {
            const ChannelParams params(0.2, length, dark);
            const ChannelParams longer = params.at_length(length + 5.0);
            for (unsigned n = 0; n <= 30; ++n) {
                CAPTURE(length);
                CAPTURE(dark);
                CAPTURE(n);
                const double s = yield_n(params, n);
                const double es = error_yield_n(params, n);
                CHECK(s >= 0.0);
                CHECK(s <= 1.0);
                CHECK(es >= 0.0);
                CHECK(es <= s * (1 + 1e-12));
                // less transmission lowers the yield once eta is below 1/n
                if (n <= 1 || longer.transmittance() * n <= 1.0) CHECK(yield_n(longer, n) <= s * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("near-lossless multi-pair yields grow with a little loss") {
    // losing one photon of a two-detector event leaves a valid single click
    const ChannelParams lossless(0.2, 0.0, 0.0);
    const ChannelParams lossy(0.2, 5.0, 0.0);
    CHECK(yield_n(lossless, 3) == doctest::Approx(0.5));
    CHECK(yield_n(lossy, 3) > yield_n(lossless, 3));
    CHECK(yield_n(lossy, 1) < yield_n(lossless, 1));
    const auto ref = oracle::enumerate_yields(lossy.transmittance(), 0.0, 3);
    CHECK(yield_n(lossy, 3) == doctest::Approx(ref.yield).epsilon(1e-12));
}

TEST_CASE("yield table matches the per-n functions") {
    const ChannelParams params(0.2, 25.0, 1e-5);
    const auto table = YieldTable::build(params, 12, DarkCountTerm::as_printed);
    REQUIRE(table.yield.size() == 13);
    for (unsigned n = 0; n <= 12; ++n) {
        CHECK(table.yield[n] == yield_n(params, n));
        CHECK(table.error_yield[n] == error_yield_n(params, n, DarkCountTerm::as_printed));
    }
}

TEST_CASE("closed form agrees with the summed series") {
    for (double lam : {0.0, 0.01, 0.1, 0.5, 1.0}) {
        for (double length : {0.0, 10.0, 40.0, 100.0}) {
            for (double dark : {0.0, 1e-6, 1e-4}) {
                CAPTURE(lam);
                CAPTURE(length);
                CAPTURE(dark);
                const PairIntensity l(lam);
                const ChannelParams params(0.2, length, dark);
                const auto closed = observed_closed_form(l, params);
                const auto series = observed_series(l, params, PairDistribution::build(l));
                CHECK(series.gain == doctest::Approx(closed.gain).epsilon(1e-8).scale(1e-30));
                CHECK(series.error_gain() == doctest::Approx(closed.error_gain()).epsilon(1e-8).scale(1e-30));
            }
        }
    }
}

TEST_CASE("vacuum source sees only dark counts") {
    const double d = 1e-6;
    const ChannelParams params(0.2, 30.0, d);
    const auto obs = observed_closed_form(PairIntensity(0.0), params);
    CHECK(obs.gain == doctest::Approx(4 * d * d * (1 - d) * (1 - d)).epsilon(1e-12));
    CHECK(obs.qber == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero gain reports zero error rate") {
    const PairIntensity l(0.0);
    const auto obs = observed_series(l, ChannelParams(0.2, 10.0, 0.0), PairDistribution::build(l));
    CHECK(obs.gain == 0.0);
    CHECK(obs.qber == 0.0);
    CHECK(obs.zero_gain);
}

TEST_CASE("observations outside [0,1] are rejected") {
    const PairIntensity l(0.1);
    CHECK_THROWS_AS(make_observation(l, 1.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(make_observation(l, -1e-3, 0.0), std::domain_error);
    CHECK_THROWS_AS(make_observation(l, 1e-3, 2e-3), std::domain_error);
    const auto ok = make_observation(l, 1e-3, 1e-5);
    CHECK(ok.qber == doctest::Approx(0.01));
    CHECK_FALSE(ok.zero_gain);
}

TEST_CASE("series requires a matching distribution") {
    const auto dist = PairDistribution::build(PairIntensity(0.2));
    CHECK_THROWS_AS(observed_series(PairIntensity(0.1), ChannelParams(0.2, 1.0, 1e-6), dist),
                    std::invalid_argument);
}

TEST_CASE("error rate climbs toward one half as dark counts dominate") {
    const PairIntensity l(0.1);
    double previous = 0.0;
    for (double length = 0.0; length <= 600.0; length += 20.0) {
        const auto obs = observed_closed_form(l, ChannelParams(0.2, length, 1e-6));
        CHECK(obs.qber >= previous - 1e-12);
        CHECK(obs.qber <= 0.5 + 1e-12);
        previous = obs.qber;
    }
    CHECK(previous == doctest::Approx(0.5).epsilon(1e-3));
}
