#include "dfsqkd/bounds.hpp"
#include "dfsqkd/channel.hpp"
#include "dfsqkd/cli.hpp"
#include "dfsqkd/keyrate.hpp"
#include "dfsqkd/optics.hpp"
#include "dfsqkd/source.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace dfsqkd;

namespace {

DarkCountTerm variant_of(const std::string& s) { return parse_dark_count_term(s); }

ProtocolKind kind_of(const std::string& s) {
    if (s == "three_intensity") return ProtocolKind::three_intensity;
    if (s == "two_intensity") return ProtocolKind::two_intensity;
    if (s == "no_decoy") return ProtocolKind::no_decoy;
    throw std::invalid_argument("unknown protocol kind '" + s + "'");
}

optics::Code code_of(const std::string& s) {
    for (auto c : optics::kAllCodes) {
        if (optics::to_string(c) == s) return c;
    }
    throw std::invalid_argument("unknown code '" + s + "' (minus, plus, zero, one)");
}

std::string table_of(const optics::FockState& state) {
    std::ostringstream os;
    optics::write_table(os, state);
    return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decoy-state key-rate analysis for DFS-encoded photon pairs";

    // source
    m.def("pair_probability", [](double lam, std::size_t n) { return pair_probability(PairIntensity(lam), n); },
          py::arg("lam"), py::arg("n"));
    m.def("pair_tail", [](double lam, std::size_t n) { return pair_tail(PairIntensity(lam), n); },
          py::arg("lam"), py::arg("n"));

    py::class_<PairDistribution>(m, "PairDistribution")
        .def_static("build",
                    [](double lam, double tail_bound, std::size_t max_terms) {
                        return PairDistribution::build(PairIntensity(lam), tail_bound, max_terms);
                    },
                    py::arg("lam"), py::arg("tail_bound") = kDefaultTailBound,
                    py::arg("max_terms") = kDefaultMaxTerms)
        .def_property_readonly("lam", [](const PairDistribution& d) { return d.intensity().value(); })
        .def_property_readonly("truncation", &PairDistribution::truncation)
        .def_property_readonly("probabilities", [](const PairDistribution& d) {
            return std::vector<double>(d.probabilities().begin(), d.probabilities().end());
        })
        .def_property_readonly("tail", &PairDistribution::tail)
        .def("total", &PairDistribution::total)
        .def("mean_pairs", &PairDistribution::mean_pairs);

    // channel
    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<double, double, double>(), py::arg("k_db_per_km"), py::arg("length_km"),
             py::arg("dark_count"))
        .def_property_readonly("k_db_per_km", &ChannelParams::loss_db_per_km)
        .def_property_readonly("length_km", &ChannelParams::length_km)
        .def_property_readonly("dark_count", &ChannelParams::dark_count)
        .def_property_readonly("eta", &ChannelParams::transmittance);

    py::class_<ObservedStatistics>(m, "ObservedStatistics")
        .def_readonly("gain", &ObservedStatistics::gain)
        .def_readonly("qber", &ObservedStatistics::qber)
        .def_readonly("zero_gain", &ObservedStatistics::zero_gain)
        .def_property_readonly("lam", [](const ObservedStatistics& o) { return o.lambda.value(); })
        .def("__repr__", [](const ObservedStatistics& o) {
            return "ObservedStatistics(gain=" + std::to_string(o.gain) + ", qber=" + std::to_string(o.qber) + ")";
        });

    m.def("yield_n", &yield_n, py::arg("params"), py::arg("n"));
    m.def("error_yield_n",
          [](const ChannelParams& p, std::size_t n, const std::string& v) { return error_yield_n(p, n, variant_of(v)); },
          py::arg("params"), py::arg("n"), py::arg("variant") = "squared_dark");
    m.def("observed_closed_form",
          [](double lam, const ChannelParams& p) { return observed_closed_form(PairIntensity(lam), p); },
          py::arg("lam"), py::arg("params"));
    m.def("observed_series",
          [](double lam, const ChannelParams& p, const std::string& v, double tail_bound) {
              const PairIntensity l(lam);
              return observed_series(l, p, PairDistribution::build(l, tail_bound), variant_of(v));
          },
          py::arg("lam"), py::arg("params"), py::arg("variant") = "squared_dark",
          py::arg("tail_bound") = kDefaultTailBound);

    // bounds
    py::class_<ClampedBound>(m, "ClampedBound")
        .def_readonly("value", &ClampedBound::value)
        .def_readonly("raw", &ClampedBound::raw)
        .def_readonly("clamped", &ClampedBound::clamped);

    py::class_<DecoyBounds>(m, "DecoyBounds")
        .def_readonly("s1_lower", &DecoyBounds::s1_lower)
        .def_readonly("e1_upper", &DecoyBounds::e1_upper)
        .def_readonly("s0_used", &DecoyBounds::s0_used)
        .def_readonly("available", &DecoyBounds::available)
        .def_property_readonly("method", [](const DecoyBounds& b) { return std::string(to_string(b.method)); });

    m.def("s1_lower_three", &s1_lower_three, py::arg("signal"), py::arg("decoy"), py::arg("s0"));
    m.def("e1_upper_three", &e1_upper_three, py::arg("signal"), py::arg("s0"), py::arg("s1_lower"));
    m.def("s0_upper_two", &s0_upper_two, py::arg("signal"));
    m.def("s1_lower_two", &s1_lower_two, py::arg("signal"), py::arg("decoy"));
    m.def("e1_upper_two", &e1_upper_two, py::arg("signal"), py::arg("s1_lower"));
    m.def("s1_lower_none", &s1_lower_none, py::arg("signal"));

    // keyrate
    m.def("binary_entropy", &binary_entropy, py::arg("x"));
    m.def("pns_limit_distance",
          [](double lam, double k, double a) { return pns_limit_distance(PairIntensity(lam), k, a); },
          py::arg("lam"), py::arg("k_db_per_km"), py::arg("attack_success") = 0.30);

    py::class_<RateValue>(m, "RateValue")
        .def_readonly("value", &RateValue::value)
        .def_readonly("raw", &RateValue::raw)
        .def_readonly("floored", &RateValue::floored);

    py::class_<KeyRatePoint>(m, "KeyRatePoint")
        .def_readonly("length_km", &KeyRatePoint::length_km)
        .def_readonly("signal", &KeyRatePoint::signal)
        .def_readonly("bounds", &KeyRatePoint::bounds)
        .def_readonly("rate", &KeyRatePoint::rate);

    py::class_<RateModel>(m, "RateModel")
        .def(py::init([](const std::string& kind, double lam, double lam_prime, double k, double dark,
                         double q, double f, const std::string& variant) {
                 return RateModel(DecoyProtocol::make(kind_of(kind), PairIntensity(lam), PairIntensity(lam_prime)),
                                  ChannelModel{k, dark, variant_of(variant), kDefaultTailBound},
                                  ProtocolConstants::with_constant_f(q, f));
             }),
             py::arg("kind"), py::arg("lam"), py::arg("lam_prime") = 0.0, py::arg("k_db_per_km") = 0.2,
             py::arg("dark_count") = 1e-6, py::arg("q") = 0.5, py::arg("f") = 1.2,
             py::arg("variant") = "squared_dark")
        .def("at", &RateModel::at, py::arg("length_km"))
        .def("max_secure_distance",
             [](const RateModel& model, double coarse, double resolution, double max_length) {
                 const auto d = max_secure_distance(model, {coarse, resolution, max_length});
                 return d.exists ? py::cast(d.length_km) : py::none();
             },
             py::arg("coarse_step_km") = 1.0, py::arg("resolution_km") = 0.01, py::arg("max_length_km") = 500.0);

    // optics
    py::class_<optics::FockState>(m, "FockState")
        .def("norm2", &optics::FockState::norm2)
        .def("__len__", &optics::FockState::size)
        .def("table", &table_of)
        .def("terms", [](const optics::FockState& s) {
            std::vector<std::tuple<std::string, std::string, std::complex<double>>> out;
            for (const auto& [key, amp] : s.terms()) out.emplace_back(key.pattern(), optics::to_string(key.ancilla), amp);
            return out;
        })
        .def("inner", &optics::FockState::inner, py::arg("other"));

    py::class_<optics::AttackTrace>(m, "AttackTrace")
        .def_property_readonly("code", [](const optics::AttackTrace& t) { return optics::to_string(t.code); })
        .def_property_readonly("postselect_probability", [](const optics::AttackTrace& t) { return t.postselected.probability; })
        .def_property_readonly("first_probability", [](const optics::AttackTrace& t) { return t.first.probability; })
        .def_property_readonly("second_probability", [](const optics::AttackTrace& t) { return t.second.probability; })
        .def_property_readonly("conditional_success", &optics::AttackTrace::conditional_success)
        .def_readonly("encoded", &optics::AttackTrace::encoded)
        .def_property_readonly("final_state", [](const optics::AttackTrace& t) { return t.final_state(); })
        .def_property_readonly("final_fidelity", [](const optics::AttackTrace& t) {
            return optics::fidelity(t.final_state(), optics::expected_attack_output(t.code));
        });

    m.def("run_full_attack", [](const std::string& code) { return optics::run_full_attack(code_of(code)); },
          py::arg("code"));
    m.def("encoded_pair_state", [](const std::string& code) { return optics::encoded_pair_state(code_of(code)); },
          py::arg("code"));

    // batch front-end
    m.def("run",
          [](const std::string& config_text, const std::map<std::string, std::string>& overrides) {
              std::vector<cli::Setting> settings(overrides.begin(), overrides.end());
              const auto report = cli::run(cli::parse_config(config_text, settings));
              return py::make_tuple(report.text, report.pass);
          },
          py::arg("config_text") = "", py::arg("overrides") = std::map<std::string, std::string>{},
          "Runs one batch mode and returns (text, passed).");
    m.attr("FIG1_HEADER") = std::string(cli::kFig1Header);

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
