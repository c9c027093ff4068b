#pragma once

#include "polariton/core.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace polariton {

using cplx = std::complex<double>;

// Basis state of the single-excitation sector. Emitter and dark-state
// indices are 1-based.
struct SiteIndex {
    enum class Kind { Cavity, Emitter, BrightState, DarkState };
    Kind kind = Kind::Cavity;
    std::int64_t index = 0;

    static SiteIndex cavity() { return {Kind::Cavity, 0}; }
    static SiteIndex emitter(std::int64_t j) { return {Kind::Emitter, j}; }
    static SiteIndex bright() { return {Kind::BrightState, 0}; }
    static SiteIndex dark(std::int64_t k) { return {Kind::DarkState, k}; }

    bool operator==(const SiteIndex&) const = default;
};

class PoleCollision : public NumericError {
public:
    PoleCollision(std::string where, std::int64_t emitter, const std::string& what)
        : NumericError(std::move(where), what), emitter_(emitter) {}
    // 1-based emitter index, 0 for the cavity denominator.
    std::int64_t emitter() const noexcept { return emitter_; }

private:
    std::int64_t emitter_;
};

// Laplace-space pole sum: G(z) = sum_a A_a / (z - z_a).
struct PoleExpansion {
    std::vector<cplx> poles;
    std::vector<cplx> amplitudes;
};

// Real spectrum of the arrowhead single-excitation Hamiltonian
// [[E_C, g 1^T], [g 1, diag(E_j)]], sorted ascending, with eigenvector data
// sufficient to form any residue without storing eigenvectors.
struct ArrowheadSpectrum {
    struct Root {
        enum class Kind { Secular, Dark, DecoupledCavity, DecoupledGroup };
        Kind kind = Kind::Secular;
        double energy = 0.0;
        double cavity_weight = 0.0;  // |<C|v>|^2
        std::size_t group = 0;       // owning group for Dark / DecoupledGroup
        std::size_t origin = 0;      // Secular: nearest pole, energy = groups[origin] + offset
        double offset = 0.0;
        std::size_t multiplicity = 1;
    };
    struct Group {
        double energy = 0.0;
        std::vector<std::size_t> members;  // 0-based emitter indices
    };
    std::vector<Root> roots;
    std::vector<Group> groups;  // distinct emitter energies, ascending
    std::vector<std::size_t> group_of;  // emitter -> group
    double cavity_energy = 0.0;
    double coupling = 0.0;

    // E_alpha - E_j with the cancellation-free offset representation.
    double gap(std::size_t root, std::size_t emitter) const;
};

inline constexpr std::int64_t kDefaultDenseLimit = 100000;

cplx aux_cavity_energy(cplx z, const DisorderSample& sample, const SystemParams& params);

cplx greens_element(SiteIndex x, SiteIndex y, cplx z, const DisorderSample& sample,
                    const SystemParams& params);

// Lorentz-averaged element in the thermodynamic limit (E_j -> E_M - i sigma).
cplx averaged_greens_element(SiteIndex x, SiteIndex y, cplx z, const SystemParams& params);

ArrowheadSpectrum arrowhead_spectrum(const DisorderSample& sample, const SystemParams& params,
                                     std::int64_t dense_limit = kDefaultDenseLimit);

// Roots z = -i E_alpha of the characteristic polynomial; amplitudes left empty.
PoleExpansion char_poly_poles(const DisorderSample& sample, const SystemParams& params,
                              std::int64_t dense_limit = kDefaultDenseLimit);

// Poles and residues of G_{x,y}; only cavity and emitter sites are supported.
PoleExpansion residue_expansion(SiteIndex x, SiteIndex y, const ArrowheadSpectrum& spectrum);

cplx inverse_laplace(const PoleExpansion& expansion, double t);

}  // namespace polariton
