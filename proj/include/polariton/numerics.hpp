#pragma once

#include "polariton/core.hpp"
#include "polariton/greens.hpp"

#include <array>
#include <functional>
#include <vector>

namespace polariton {

using ComplexFn = std::function<cplx(cplx)>;

// First-order root shifts of P0 + P1, where P0 = lead * prod (z - z_mu).
struct PptProblem {
    std::vector<cplx> unperturbed_roots;
    ComplexFn perturbation;
    ComplexFn derivative;  // empty: contour-integral derivative
    cplx leading = 1.0;
    double derivative_radius = 1e-3;
};

class DegenerateBreakdown : public NumericError {
public:
    DegenerateBreakdown(std::size_t root, const std::string& what)
        : NumericError("numerics.ppt_corrections", what), root_(root) {}
    std::size_t root() const noexcept { return root_; }

private:
    std::size_t root_;
};

// Derivative of a holomorphic function from a trapezoid rule on a circle.
cplx contour_derivative(const ComplexFn& f, cplx z, double radius, int points = 32);

std::vector<cplx> ppt_corrections(const PptProblem& problem);

// Donor relaxation as a cubic root problem: unperturbed roots
// {-i eps1, -i eps2, -i E1} and the donor shift from the frozen g^2 term.
struct RelaxationPpt {
    std::array<cplx, 3> unperturbed;
    std::array<cplx, 3> corrections;
    // Amplitude decay rate of the donor root, -Re of its correction.
    double decay_rate() const { return -corrections[2].real(); }
};

RelaxationPpt relaxation_ppt(double donor_energy, const SystemParams& params);

struct EsmExpansion {
    std::vector<double> poles;
    std::vector<double> coefficients;
    std::function<double(double)> density;
    ComplexFn target;
    // Continuum of the target outside [support_lo, support_hi], added when set.
    bool continuum_tail = false;
    double support_lo = 0.0;
    double support_hi = 0.0;

    cplx pole_sum(cplx z) const;
    cplx tail(cplx z) const;
    cplx evaluate(cplx z) const { return continuum_tail ? pole_sum(z) + tail(z) : pole_sum(z); }
};

EsmExpansion esm_expand(ComplexFn target, std::vector<double> poles, std::function<double(double)> density,
                        bool continuum_tail = false);

// Largest |Re F_N - Re F| over the probe frequencies at z = i w + offset.
double kramers_kronig_residual(const EsmExpansion& expansion, const std::vector<double>& omegas, double offset);

// Decay rate from a single-pole fit of G at z = -i E1 + offset.
double fit_rate_from_greens(const ComplexFn& greens, double donor_energy, double offset);
// Linear offset bias removed by combining offsets delta and 2 delta.
double fit_rate_extrapolated(const ComplexFn& greens, double donor_energy, double offset);
double default_fit_offset(const SystemParams& params, double donor_energy);

}  // namespace polariton
