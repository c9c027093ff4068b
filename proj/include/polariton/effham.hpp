#pragma once

#include "polariton/core.hpp"

#include <Eigen/Core>
#include <complex>
#include <string_view>

namespace polariton {

enum class Regime { Underdamped, ExceptionalPoint, Overdamped, OffResonant };

std::string_view to_string(Regime r);

// Complex polariton energies of the disorder-averaged cavity + bright-state
// block. Ordered by real part, ties broken by imaginary part.
struct EigenPair {
    std::complex<double> eps1;
    std::complex<double> eps2;
    double rabi_splitting = 0.0;  // Re(eps2 - eps1)
    Regime regime = Regime::OffResonant;
};

struct EffectiveHamiltonian {
    Eigen::Matrix2cd bright_block;
    std::complex<double> dark_block;  // shared by every dark state
};

inline constexpr double kResonanceTolerance = 1e-9;
inline constexpr double kExceptionalPointTolerance = 1e-9;

EffectiveHamiltonian effective_hamiltonian(const SystemParams& params);
EigenPair eigenenergies(const SystemParams& params);
Regime classify_regime(const SystemParams& params);

// Leading-order expansions valid for sigma/Omega < 0.3 or > 3 on resonance.
EigenPair asymptotic_eigenenergies(const SystemParams& params);

// Disorder width at which the two resonant branches coalesce.
double exceptional_point_width(const SystemParams& params);

}  // namespace polariton
