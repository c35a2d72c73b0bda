#include "dfsqkd/optics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dfsqkd::optics {

namespace {

constexpr std::array<Spatial, 4> kSplitPorts{Spatial::a1, Spatial::a2, Spatial::b1, Spatial::b2};

void accumulate(FockState::Terms& terms, const BasisKey& key, Amplitude amp) {
    auto [it, inserted] = terms.try_emplace(key, amp);
    if (!inserted) it->second += amp;
}

double factorial(unsigned n) {
    double f = 1.0;
    for (unsigned k = 2; k <= n; ++k) f *= k;
    return f;
}

const std::array<ModeLabel, kModeCount>& all_modes() {
    static const std::array<ModeLabel, kModeCount> modes = [] {
        std::array<ModeLabel, kModeCount> m{};
        for (std::size_t s = 0; s < kSpatialCount; ++s) {
            m[2 * s] = H(static_cast<Spatial>(s));
            m[2 * s + 1] = V(static_cast<Spatial>(s));
        }
        return m;
    }();
    return modes;
}

}  // namespace

std::string to_string(Spatial s) {
    switch (s) {
        case Spatial::a: return "a";
        case Spatial::b: return "b";
        case Spatial::a1: return "a1";
        case Spatial::a2: return "a2";
        case Spatial::b1: return "b1";
        case Spatial::b2: return "b2";
    }
    return "?";
}

std::string to_string(Ancilla a) {
    switch (a) {
        case Ancilla::none: return "-";
        case Ancilla::E0: return "E0";
        case Ancilla::E1: return "E1";
        case Ancilla::E2: return "E2";
        case Ancilla::E3: return "E3";
    }
    return "?";
}

std::string ModeLabel::name() const {
    return std::string(polarization == Polarization::H ? "H_" : "V_") + to_string(spatial);
}

unsigned BasisKey::photons(Spatial s) const {
    return photons(H(s)) + photons(V(s));
}

unsigned BasisKey::total_photons() const {
    unsigned total = 0;
    for (auto n : occupation) total += n;
    return total;
}

std::string BasisKey::pattern() const {
    std::string out;
    for (const auto& m : all_modes()) {
        const unsigned n = photons(m);
        if (n == 0) continue;
        if (!out.empty()) out += ' ';
        out += m.name();
        if (n > 1) out += '^' + std::to_string(n);
    }
    if (sink) out = out.empty() ? "Z" : "Z " + out;
    return out.empty() ? "vac" : out;
}

// ---------------------------------------------------------------------------

FockState::FockState(Terms terms) : terms_(std::move(terms)) {
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPruneEpsilon; });
}

FockState FockState::vacuum(Ancilla ancilla) {
    BasisKey key;
    key.ancilla = ancilla;
    return FockState(Terms{{key, 1.0}});
}

FockState FockState::pattern(std::initializer_list<ModeLabel> modes, Ancilla ancilla) {
    BasisKey key;
    key.ancilla = ancilla;
    for (const auto& m : modes) ++key.occupation[m.index()];
    // a_i^dagger applied n times to vacuum carries sqrt(n!), the basis vector does not
    return FockState(Terms{{key, 1.0}});
}

FockState FockState::sink(Ancilla ancilla) {
    BasisKey key;
    key.ancilla = ancilla;
    key.sink = true;
    return FockState(Terms{{key, 1.0}});
}

Amplitude FockState::amplitude(const BasisKey& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Amplitude{} : it->second;
}

double FockState::norm2() const {
    double n = 0.0;
    for (const auto& [key, amp] : terms_) n += std::norm(amp);
    return n;
}

Amplitude FockState::inner(const FockState& other) const {
    Amplitude acc{};
    const auto& small = terms_.size() <= other.terms_.size() ? terms_ : other.terms_;
    for (const auto& [key, amp] : small) {
        acc += std::conj(amplitude(key)) * other.amplitude(key);
    }
    return acc;
}

FockState FockState::normalized() const {
    const double n = norm2();
    if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
    return Amplitude(1.0 / std::sqrt(n)) * *this;
}

FockState FockState::create(std::span<const std::pair<ModeLabel, Amplitude>> combination) const {
    Terms out;
    for (const auto& [key, amp] : terms_) {
        if (key.sink) throw std::domain_error("cannot add photons to the sink vector");
        for (const auto& [mode, coeff] : combination) {
            BasisKey next = key;
            const auto k = next.occupation[mode.index()]++;
            accumulate(out, next, amp * coeff * std::sqrt(static_cast<double>(k) + 1.0));
        }
    }
    return FockState(std::move(out));
}

FockState FockState::create(ModeLabel mode) const {
    const std::pair<ModeLabel, Amplitude> single{mode, 1.0};
    return create(std::span(&single, 1));
}

bool FockState::occupies(Spatial s) const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [s](const auto& kv) { return kv.first.photons(s) > 0; });
}

FockState operator+(const FockState& lhs, const FockState& rhs) {
    FockState::Terms out = lhs.terms_;
    for (const auto& [key, amp] : rhs.terms_) accumulate(out, key, amp);
    return FockState(std::move(out));
}

FockState operator-(const FockState& lhs, const FockState& rhs) {
    return lhs + Amplitude(-1.0) * rhs;
}

FockState operator*(Amplitude c, const FockState& state) {
    FockState::Terms out = state.terms_;
    for (auto& [key, amp] : out) amp *= c;
    return FockState(std::move(out));
}

FockState tensor(const FockState& lhs, const FockState& rhs) {
    FockState::Terms out;
    for (const auto& [lk, la] : lhs.terms()) {
        for (const auto& [rk, ra] : rhs.terms()) {
            BasisKey key;
            for (std::size_t i = 0; i < kModeCount; ++i) {
                if (lk.occupation[i] && rk.occupation[i]) {
                    throw std::invalid_argument("tensor factors share mode " + all_modes()[i].name());
                }
                key.occupation[i] = lk.occupation[i] + rk.occupation[i];
            }
            if (lk.ancilla != Ancilla::none && rk.ancilla != Ancilla::none) {
                throw std::invalid_argument("tensor factors both carry an ancilla");
            }
            key.ancilla = lk.ancilla != Ancilla::none ? lk.ancilla : rk.ancilla;
            key.sink = lk.sink || rk.sink;
            accumulate(out, key, la * ra);
        }
    }
    return FockState(std::move(out));
}

double fidelity(const FockState& a, const FockState& b) {
    const double na = a.norm2();
    const double nb = b.norm2();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::norm(a.inner(b)) / (na * nb);
}

void write_table(std::ostream& os, const FockState& state) {
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << "pattern\tancilla\treal\timag\n" << std::scientific << std::setprecision(14);
    for (const auto& [key, amp] : state.terms()) {
        os << key.pattern() << '\t' << to_string(key.ancilla) << '\t' << amp.real() << '\t'
           << amp.imag() << '\n';
    }
    os.flags(flags);
    os.precision(precision);
}

// ---------------------------------------------------------------------------

std::string to_string(Code c) {
    switch (c) {
        case Code::minus: return "minus";
        case Code::plus: return "plus";
        case Code::zero: return "zero";
        case Code::one: return "one";
    }
    return "?";
}

Amplitude code_phase(Code c) {
    switch (c) {
        case Code::minus: return -1.0;
        case Code::plus: return 1.0;
        case Code::zero: return {0.0, 1.0};
        case Code::one: return {0.0, -1.0};
    }
    return 0.0;
}

FockState encoded_pair_state(Code c) {
    const Amplitude phase = code_phase(c);
    const auto vac = FockState::vacuum();
    // H_a^2 V_b^2 + 2c H_a V_a H_b V_b + c^2 V_a^2 H_b^2
    const auto hh_vv = vac.create(H(Spatial::a)).create(H(Spatial::a)).create(V(Spatial::b)).create(V(Spatial::b));
    const auto hv_hv = vac.create(H(Spatial::a)).create(V(Spatial::a)).create(H(Spatial::b)).create(V(Spatial::b));
    const auto vv_hh = vac.create(V(Spatial::a)).create(V(Spatial::a)).create(H(Spatial::b)).create(H(Spatial::b));
    const Amplitude scale = 1.0 / (2.0 * std::sqrt(3.0));
    return scale * (hh_vv + (2.0 * phase) * hv_hv + (phase * phase) * vv_hh);
}

FockState pair_encoding(Code c, Spatial first, Spatial second) {
    const Amplitude r = 1.0 / std::sqrt(2.0);
    return r * (FockState::pattern({H(first), V(second)}) +
                code_phase(c) * FockState::pattern({V(first), H(second)}));
}

// ---------------------------------------------------------------------------

FockState apply_beamsplitter(const FockState& state) {
    for (auto port : kSplitPorts) {
        if (state.occupies(port)) {
            throw std::invalid_argument("state already occupies split port " + to_string(port));
        }
    }
    const Amplitude r = 1.0 / std::sqrt(2.0);
    struct Substitution {
        ModeLabel from;
        std::array<std::pair<ModeLabel, Amplitude>, 2> to;
    };
    const std::array<Substitution, 4> subs{{
        {H(Spatial::a), {{{H(Spatial::a1), r}, {H(Spatial::a2), -r}}}},
        {V(Spatial::a), {{{V(Spatial::a1), r}, {V(Spatial::a2), -r}}}},
        {H(Spatial::b), {{{H(Spatial::b1), r}, {H(Spatial::b2), -r}}}},
        {V(Spatial::b), {{{V(Spatial::b1), r}, {V(Spatial::b2), -r}}}},
    }};

    FockState out;
    for (const auto& [key, amp] : state.terms()) {
        BasisKey base = key;
        double norm = 1.0;
        for (const auto& s : subs) {
            norm *= std::sqrt(factorial(key.photons(s.from)));
            base.occupation[s.from.index()] = 0;
        }
        FockState partial(FockState::Terms{{base, amp / norm}});
        for (const auto& s : subs) {
            for (unsigned k = 0; k < key.photons(s.from); ++k) partial = partial.create(s.to);
        }
        out = out + partial;
    }
    return out;
}

Projection postselect_one_per_mode(const FockState& state) {
    if (state.occupies(Spatial::a) || state.occupies(Spatial::b)) {
        throw std::invalid_argument("post-selection expects a state on the split ports only");
    }
    const double total = state.norm2();
    if (total == 0.0) return {};
    FockState::Terms kept;
    for (const auto& [key, amp] : state.terms()) {
        const bool one_each = std::all_of(kSplitPorts.begin(), kSplitPorts.end(),
                                          [&](Spatial s) { return key.photons(s) == 1; });
        if (one_each && !key.sink) kept.emplace(key, amp);
    }
    FockState projected(std::move(kept));
    const double p = projected.norm2() / total;
    if (projected.empty() || p == 0.0) return {};
    return {projected.normalized(), p};
}

// ---------------------------------------------------------------------------

Isometry::Isometry(std::vector<ModeLabel> support, std::vector<Rule> rules, double tolerance)
    : support_(std::move(support)) {
    auto on_support = [this](const BasisKey& key) {
        for (std::size_t i = 0; i < kModeCount; ++i) {
            if (key.occupation[i] == 0) continue;
            if (std::find_if(support_.begin(), support_.end(), [i](ModeLabel m) {
                    return m.index() == i;
                }) == support_.end()) {
                return false;
            }
        }
        return true;
    };

    for (auto& rule : rules) {
        if (rule.input.size() != 1 || std::abs(rule.input.terms().begin()->second - 1.0) > 1e-15) {
            throw std::invalid_argument("isometry rule input must be a single basis vector");
        }
        const BasisKey& key = rule.input.terms().begin()->first;
        if (!on_support(key) || key.sink) {
            throw std::invalid_argument("isometry rule input leaves the declared support: " +
                                        key.pattern());
        }
        for (const auto& [out_key, amp] : rule.output.terms()) {
            if (!on_support(out_key)) {
                throw std::invalid_argument("isometry rule output leaves the declared support: " +
                                            out_key.pattern());
            }
        }
        if (!rules_.emplace(key, std::move(rule.output)).second) {
            throw std::invalid_argument("duplicate isometry rule for " + key.pattern());
        }
    }

    for (auto i = rules_.begin(); i != rules_.end(); ++i) {
        for (auto j = i; j != rules_.end(); ++j) {
            const Amplitude expected = (i == j) ? 1.0 : 0.0;
            defect_ = std::max(defect_, std::abs(i->second.inner(j->second) - expected));
        }
    }
    if (defect_ > tolerance) {
        throw std::invalid_argument("map does not preserve inner products (defect " +
                                    std::to_string(defect_) + ")");
    }
}

BasisKey Isometry::restrict(const BasisKey& key) const {
    BasisKey local;
    for (const auto& m : support_) local.occupation[m.index()] = key.occupation[m.index()];
    local.ancilla = key.ancilla == Ancilla::none ? Ancilla::E0 : key.ancilla;
    local.sink = key.sink;
    return local;
}

FockState Isometry::apply(const FockState& state) const {
    FockState::Terms out;
    for (const auto& [key, amp] : state.terms()) {
        const BasisKey local = restrict(key);
        auto rule = rules_.find(local);
        if (rule == rules_.end()) throw IsometryDomainError(local.pattern() + " " + to_string(local.ancilla));
        for (const auto& [image_key, image_amp] : rule->second.terms()) {
            BasisKey next = key;
            for (const auto& m : support_) next.occupation[m.index()] = image_key.occupation[m.index()];
            next.ancilla = image_key.ancilla;
            next.sink = image_key.sink;
            accumulate(out, next, amp * image_amp);
        }
    }
    return FockState(std::move(out));
}

Projection apply_isometry_and_project(const FockState& state, const Isometry& iso, Ancilla keep) {
    const double total = state.norm2();
    if (total == 0.0) return {};
    const FockState image = iso.apply(state);
    FockState::Terms kept;
    for (const auto& [key, amp] : image.terms()) {
        if (key.ancilla != keep) continue;
        BasisKey released = key;
        released.ancilla = Ancilla::none;
        accumulate(kept, released, amp);
    }
    FockState projected(std::move(kept));
    const double p = projected.norm2() / total;
    if (projected.empty() || p == 0.0) return {};
    return {projected.normalized(), p};
}

namespace {

std::vector<ModeLabel> split_support() {
    std::vector<ModeLabel> modes;
    for (auto s : kSplitPorts) {
        modes.push_back(H(s));
        modes.push_back(V(s));
    }
    return modes;
}

FockState with_ancilla(const FockState& state, Ancilla ancilla) {
    FockState::Terms out;
    for (const auto& [key, amp] : state.terms()) {
        BasisKey k = key;
        k.ancilla = ancilla;
        accumulate(out, k, amp);
    }
    return FockState(std::move(out));
}

// post-selected patterns that survive the first projection
FockState p1(Ancilla e = Ancilla::none) {
    return FockState::pattern({H(Spatial::a1), V(Spatial::b1), H(Spatial::a2), V(Spatial::b2)}, e);
}
FockState p2(Ancilla e = Ancilla::none) {
    return FockState::pattern({V(Spatial::a1), H(Spatial::b1), V(Spatial::a2), H(Spatial::b2)}, e);
}
FockState y1(Ancilla e = Ancilla::none) {
    return FockState::pattern({H(Spatial::a1), H(Spatial::b1), V(Spatial::a2), V(Spatial::b2)}, e);
}
FockState y2(Ancilla e = Ancilla::none) {
    return FockState::pattern({V(Spatial::a1), V(Spatial::b1), H(Spatial::a2), H(Spatial::b2)}, e);
}

}  // namespace

FockState attack_basis_x() { return Amplitude(1.0 / std::sqrt(2.0)) * (p1() + p2()); }
FockState attack_basis_x_prime() { return Amplitude(1.0 / std::sqrt(2.0)) * (p1() - p2()); }
FockState attack_basis_y() { return Amplitude(1.0 / std::sqrt(2.0)) * (y1() + y2()); }
FockState attack_basis_y_prime() { return Amplitude(1.0 / std::sqrt(2.0)) * (y1() - y2()); }

const Isometry& attack_isometry_first() {
    static const Isometry iso = [] {
        std::vector<Isometry::Rule> rules;
        for (auto pa : {Polarization::H, Polarization::V}) {
            for (auto pb : {Polarization::H, Polarization::V}) {
                const ModeLabel ma{Spatial::a1, pa};
                const ModeLabel mb{Spatial::b2, pb};
                const Ancilla tag = pa != pb ? Ancilla::E1 : Ancilla::E2;
                rules.push_back({FockState::pattern({ma, mb}, Ancilla::E0),
                                 FockState::pattern({ma, mb}, tag)});
            }
        }
        return Isometry({H(Spatial::a1), V(Spatial::a1), H(Spatial::b2), V(Spatial::b2)},
                        std::move(rules));
    }();
    return iso;
}

const Isometry& attack_isometry_second() {
    static const Isometry iso = [] {
        const Amplitude half = 0.5;
        const Amplitude root3 = std::sqrt(3.0);
        const Amplitude r = 1.0 / std::sqrt(2.0);
        const auto ux = half * (root3 * FockState::sink(Ancilla::E1) +
                                with_ancilla(attack_basis_x(), Ancilla::E2));
        const auto ux_prime = half * (root3 * FockState::sink(Ancilla::E3) +
                                      with_ancilla(attack_basis_x_prime(), Ancilla::E2));
        // p1 = (X + X')/sqrt2, p2 = (X - X')/sqrt2
        std::vector<Isometry::Rule> rules{
            {p1(Ancilla::E0), r * (ux + ux_prime)},
            {p2(Ancilla::E0), r * (ux - ux_prime)},
            {y1(Ancilla::E0), y1(Ancilla::E2)},
            {y2(Ancilla::E0), y2(Ancilla::E2)},
        };
        return Isometry(split_support(), std::move(rules));
    }();
    return iso;
}

Isometry identity_isometry(std::vector<ModeLabel> support, std::span<const FockState> patterns,
                           Ancilla out) {
    std::vector<Isometry::Rule> rules;
    for (const auto& p : patterns) {
        rules.push_back({with_ancilla(p, Ancilla::E0), with_ancilla(p, out)});
    }
    return Isometry(std::move(support), std::move(rules));
}

AttackBasisComponents attack_basis_components(const FockState& state) {
    AttackBasisComponents c;
    c.x = attack_basis_x().inner(state);
    c.x_prime = attack_basis_x_prime().inner(state);
    c.y = attack_basis_y().inner(state);
    c.y_prime = attack_basis_y_prime().inner(state);
    c.residual_norm2 = std::max(0.0, state.norm2() - std::norm(c.x) - std::norm(c.x_prime) -
                                         std::norm(c.y) - std::norm(c.y_prime));
    return c;
}

AttackTrace run_full_attack(Code c) {
    AttackTrace trace;
    trace.code = c;
    trace.encoded = encoded_pair_state(c);
    trace.split = apply_beamsplitter(trace.encoded);
    trace.postselected = postselect_one_per_mode(trace.split);
    trace.first = apply_isometry_and_project(trace.postselected.state, attack_isometry_first(),
                                             Ancilla::E1);
    trace.second = apply_isometry_and_project(trace.first.state, attack_isometry_second(),
                                              Ancilla::E2);
    return trace;
}

FockState expected_attack_output(Code c) {
    return tensor(pair_encoding(c, Spatial::a1, Spatial::b2),
                  pair_encoding(c, Spatial::a2, Spatial::b1));
}

SchmidtDecomposition schmidt(const FockState& state, std::span<const Spatial> left_ports) {
    auto split = [&](const BasisKey& key) {
        BasisKey left;
        BasisKey right = key;
        for (auto s : left_ports) {
            for (auto m : {H(s), V(s)}) {
                left.occupation[m.index()] = key.occupation[m.index()];
                right.occupation[m.index()] = 0;
            }
        }
        return std::pair{left, right};
    };

    std::map<BasisKey, Eigen::Index> rows, cols;
    for (const auto& [key, amp] : state.terms()) {
        auto [l, r] = split(key);
        rows.try_emplace(l, static_cast<Eigen::Index>(rows.size()));
        cols.try_emplace(r, static_cast<Eigen::Index>(cols.size()));
    }
    SchmidtDecomposition out;
    if (rows.empty()) return out;

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                static_cast<Eigen::Index>(cols.size()));
    for (const auto& [key, amp] : state.terms()) {
        auto [l, r] = split(key);
        m(rows.at(l), cols.at(r)) = amp;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    out.singular_values.assign(s.data(), s.data() + s.size());

    FockState::Terms left, right;
    for (const auto& [key, i] : rows) left.emplace(key, svd.matrixU()(i, 0));
    for (const auto& [key, j] : cols) right.emplace(key, std::conj(svd.matrixV()(j, 0)));
    out.left = FockState(std::move(left));
    out.right = FockState(std::move(right));
    return out;
}

}  // namespace dfsqkd::optics
