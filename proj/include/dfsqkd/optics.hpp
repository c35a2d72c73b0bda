#pragma once

// Exact sparse Fock-state simulation of the two-pair splitting attack on
// DFS-encoded photon pairs.
//
// Bosonic modes are labelled by a spatial port (a, b before the splitter,
// a1/a2/b1/b2 after it) and a polarization. Every basis vector additionally
// carries an ancilla label for the eavesdropper's assist register and a sink
// flag that stands for the garbage state |Z> of the second isometry.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dfsqkd::optics {

using Amplitude = std::complex<double>;

enum class Spatial : std::uint8_t { a, b, a1, a2, b1, b2 };
enum class Polarization : std::uint8_t { H, V };
enum class Ancilla : std::uint8_t { none, E0, E1, E2, E3 };

inline constexpr std::size_t kSpatialCount = 6;
inline constexpr std::size_t kModeCount = 2 * kSpatialCount;
inline constexpr double kPruneEpsilon = 1e-14;

struct ModeLabel {
    Spatial spatial;
    Polarization polarization;

    constexpr std::size_t index() const noexcept {
        return 2 * static_cast<std::size_t>(spatial) + static_cast<std::size_t>(polarization);
    }
    std::string name() const;

    friend constexpr bool operator==(ModeLabel, ModeLabel) = default;
};

constexpr ModeLabel H(Spatial s) { return {s, Polarization::H}; }
constexpr ModeLabel V(Spatial s) { return {s, Polarization::V}; }

std::string to_string(Spatial s);
std::string to_string(Ancilla a);

struct BasisKey {
    std::array<std::uint8_t, kModeCount> occupation{};
    Ancilla ancilla = Ancilla::none;
    bool sink = false;

    unsigned photons(ModeLabel m) const { return occupation[m.index()]; }
    unsigned photons(Spatial s) const;
    unsigned total_photons() const;
    std::string pattern() const;

    friend auto operator<=>(const BasisKey&, const BasisKey&) = default;
};

/// Immutable sparse superposition of BasisKey vectors.
class FockState {
public:
    using Terms = std::map<BasisKey, Amplitude>;

    FockState() = default;
    /// Takes ownership of the terms, pruning amplitudes below kPruneEpsilon.
    explicit FockState(Terms terms);

    static FockState vacuum(Ancilla ancilla = Ancilla::none);
    /// One photon in each listed mode.
    static FockState pattern(std::initializer_list<ModeLabel> modes,
                             Ancilla ancilla = Ancilla::none);
    /// The garbage vector |Z> tagged with an ancilla label.
    static FockState sink(Ancilla ancilla);

    const Terms& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    Amplitude amplitude(const BasisKey& key) const;

    double norm2() const;
    /// <this|other>
    Amplitude inner(const FockState& other) const;
    FockState normalized() const;

    /// Applies sum_k c_k a_k^dagger; occupation k picks up sqrt(k+1).
    FockState create(std::span<const std::pair<ModeLabel, Amplitude>> combination) const;
    FockState create(ModeLabel mode) const;

    bool occupies(Spatial s) const;

    friend FockState operator+(const FockState& lhs, const FockState& rhs);
    friend FockState operator-(const FockState& lhs, const FockState& rhs);
    friend FockState operator*(Amplitude c, const FockState& state);

private:
    Terms terms_;
};

/// Product of two states on disjoint modes. Ancilla and sink flags must not
/// both be set.
FockState tensor(const FockState& lhs, const FockState& rhs);

/// |<a|b>|^2 / (<a|a><b|b>)
double fidelity(const FockState& a, const FockState& b);

/// Tab-separated dump: pattern, ancilla, real, imag (15 significant digits).
void write_table(std::ostream& os, const FockState& state);

// ---------------------------------------------------------------------------
// Encodings

enum class Code : std::uint8_t { minus, plus, zero, one };
inline constexpr std::array<Code, 4> kAllCodes{Code::minus, Code::plus, Code::zero, Code::one};

std::string to_string(Code c);
/// Relative phase c of the V/H branch: -1, +1, +i, -i.
Amplitude code_phase(Code c);

/// (1/(2 sqrt 3)) (H_a^+ V_b^+ + c V_a^+ H_b^+)^2 |vac>, the two-pair state.
FockState encoded_pair_state(Code c);

/// (H_x V_y + c V_x H_y)/sqrt 2, one pair shared between two ports.
FockState pair_encoding(Code c, Spatial first, Spatial second);

// ---------------------------------------------------------------------------
// Attack operations

/// Replaces every creation operator on a/b by (x1 - x2)/sqrt 2. Throws
/// std::invalid_argument when the state already occupies split ports.
FockState apply_beamsplitter(const FockState& state);

struct Projection {
    FockState state;  ///< normalized; empty when probability == 0
    double probability = 0.0;

    bool empty() const noexcept { return probability == 0.0; }
};

/// Keeps exactly one photon (any polarization) in each of a1, a2, b1, b2.
Projection postselect_one_per_mode(const FockState& state);

class IsometryDomainError : public std::domain_error {
public:
    explicit IsometryDomainError(const std::string& pattern)
        : std::domain_error("isometry is undefined on pattern " + pattern), pattern_(pattern) {}
    const std::string& pattern() const noexcept { return pattern_; }

private:
    std::string pattern_;
};

/// A linear map defined on basis patterns over a declared subset of modes plus
/// the ancilla register. Inner products between all images are validated on
/// construction.
class Isometry {
public:
    struct Rule {
        FockState input;   ///< a single basis vector on the support
        FockState output;  ///< superposition on the support (sink allowed)
    };

    Isometry(std::vector<ModeLabel> support, std::vector<Rule> rules, double tolerance = 1e-12);

    const std::vector<ModeLabel>& support() const noexcept { return support_; }
    std::size_t rule_count() const noexcept { return rules_.size(); }
    /// max |<U p_i|U p_j> - delta_ij| over the domain.
    double inner_product_defect() const noexcept { return defect_; }

    /// Terms without an ancilla are fed a fresh E0. Throws IsometryDomainError.
    FockState apply(const FockState& state) const;

private:
    BasisKey restrict(const BasisKey& key) const;

    std::vector<ModeLabel> support_;
    std::map<BasisKey, FockState> rules_;
    double defect_ = 0.0;
};

/// Applies iso, projects the ancilla onto `keep` and releases the register.
Projection apply_isometry_and_project(const FockState& state, const Isometry& iso, Ancilla keep);

/// U1 on (a1, b2): HV,VH -> E1 and HH,VV -> E2.
const Isometry& attack_isometry_first();
/// U2 on all split ports: X -> (sqrt3 Z E1 + X E2)/2, X' -> (sqrt3 Z E3 + X' E2)/2, Y -> Y E2.
const Isometry& attack_isometry_second();
/// Maps every listed pattern to itself with ancilla `out`.
Isometry identity_isometry(std::vector<ModeLabel> support, std::span<const FockState> patterns,
                           Ancilla out);

/// Components on the X, X', Y, Y' vectors spanned by the four post-selected
/// patterns that survive the first projection.
struct AttackBasisComponents {
    Amplitude x, x_prime, y, y_prime;
    double residual_norm2 = 0.0;
};
AttackBasisComponents attack_basis_components(const FockState& state);
FockState attack_basis_x();
FockState attack_basis_x_prime();
FockState attack_basis_y();
FockState attack_basis_y_prime();

struct AttackTrace {
    Code code{};
    FockState encoded;
    FockState split;
    Projection postselected;
    Projection first;
    Projection second;

    /// Success given the post-selection succeeded.
    double conditional_success() const noexcept { return first.probability * second.probability; }
    const FockState& final_state() const noexcept { return second.state; }
};

AttackTrace run_full_attack(Code c);

/// Product (a1,b2) x (a2,b1) of single-pair encodings.
FockState expected_attack_output(Code c);

struct SchmidtDecomposition {
    std::vector<double> singular_values;  ///< descending
    FockState left;                       ///< leading vector on the left ports
    FockState right;                      ///< leading vector on the remaining ports
};

/// Splits a state between the listed spatial ports and everything else.
SchmidtDecomposition schmidt(const FockState& state, std::span<const Spatial> left_ports);

}  // namespace dfsqkd::optics
