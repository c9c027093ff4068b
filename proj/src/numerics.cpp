#include "polariton/numerics.hpp"

#include "polariton/effham.hpp"
#include "polariton/spectra.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace polariton {

namespace {
constexpr cplx I{0.0, 1.0};
}

cplx contour_derivative(const ComplexFn& f, cplx z, double radius, int points)
{
    cplx sum = 0.0;
    for (int k = 0; k < points; ++k) {
        const cplx e = std::polar(1.0, 2.0 * std::numbers::pi * k / points);
        sum += f(z + radius * e) / e;
    }
    return sum / (radius * points);
}

std::vector<cplx> ppt_corrections(const PptProblem& pb)
{
    if (pb.unperturbed_roots.empty()) throw InvalidParameter("ppt_corrections: no unperturbed roots");
    if (!pb.perturbation) throw InvalidParameter("ppt_corrections: perturbation not set");
    const auto& roots = pb.unperturbed_roots;

    ComplexFn deriv = pb.derivative;
    if (deriv) {
        const cplx z0 = roots.front();
        const cplx given = deriv(z0);
        const cplx numeric = contour_derivative(pb.perturbation, z0, pb.derivative_radius);
        const double scale = std::max(std::abs(given), std::abs(numeric));
        const double floor = 1e-14 * (1.0 + std::abs(pb.perturbation(z0)) / pb.derivative_radius);
        if (std::abs(given - numeric) > 1e-6 * scale + floor)
            throw InvalidParameter("ppt_corrections: supplied derivative disagrees with the perturbation");
    } else {
        const double r = pb.derivative_radius;
        const ComplexFn f = pb.perturbation;
        deriv = [f, r](cplx z) { return contour_derivative(f, z, r); };
    }

    std::vector<cplx> out(roots.size());
    for (std::size_t m = 0; m < roots.size(); ++m) {
        cplx prod = pb.leading;
        for (std::size_t k = 0; k < roots.size(); ++k)
            if (k != m) prod *= roots[m] - roots[k];
        const cplx denom = prod + deriv(roots[m]);
        if (denom == 0.0 || !std::isfinite(std::abs(denom))) {
            std::ostringstream os;
            os << "vanishing denominator for root " << m;
            throw DegenerateBreakdown(m, os.str());
        }
        out[m] = -pb.perturbation(roots[m]) / denom;
    }
    return out;
}

RelaxationPpt relaxation_ppt(double donor_energy, const SystemParams& p)
{
    const EigenPair e = eigenenergies(p);
    RelaxationPpt out;
    out.unperturbed = {-I * e.eps1, -I * e.eps2, cplx(0.0, -donor_energy)};
    const double g2 = p.coupling * p.coupling;
    const cplx offset = I * p.emitter_center + p.disorder_width;
    for (std::size_t a = 0; a < 3; ++a) {
        // g^2 (z_a + i E_M + sigma) frozen at the unperturbed root
        const cplx frozen = g2 * (out.unperturbed[a] + offset);
        PptProblem pb;
        pb.unperturbed_roots.assign(out.unperturbed.begin(), out.unperturbed.end());
        pb.perturbation = [frozen](cplx) { return frozen; };
        pb.derivative = [](cplx) { return cplx(0.0); };
        out.corrections[a] = ppt_corrections(pb)[a];
    }
    return out;
}

cplx EsmExpansion::pole_sum(cplx z) const
{
    cplx sum = 0.0;
    for (std::size_t j = 0; j < poles.size(); ++j) sum += I * coefficients[j] / (z - I * poles[j]);
    return sum;
}

cplx EsmExpansion::tail(cplx z) const
{
    using boost::math::quadrature::gauss_kronrod;
    const double scale = std::max(1.0, 0.5 * (support_hi - support_lo));
    const auto& f = target;
    // E = edge + dir * scale * (1 - t) / t maps t in (0, 1] onto the half line.
    auto part = [&](double edge, double dir, bool imag) {
        auto integrand = [&](double t) {
            const double e = edge + dir * scale * (1.0 - t) / t;
            const double jac = scale / (t * t);
            const cplx v = f(I * e).imag() / std::numbers::pi * I / (z - I * e) * jac;
            return imag ? v.imag() : v.real();
        };
        return gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-12);
    };
    const double re = part(support_hi, 1.0, false) + part(support_lo, -1.0, false);
    const double im = part(support_hi, 1.0, true) + part(support_lo, -1.0, true);
    return {re, im};
}

EsmExpansion esm_expand(ComplexFn target, std::vector<double> poles, std::function<double(double)> density,
                        bool continuum_tail)
{
    if (poles.empty()) throw InvalidParameter("esm_expand: no pole positions");
    if (!target || !density) throw InvalidParameter("esm_expand: target and density are required");
    EsmExpansion x;
    x.coefficients.reserve(poles.size());
    double lo = poles.front(), hi = poles.front();
    for (double e : poles) {
        const double nu = density(e);
        if (!(nu > 0.0)) {
            std::ostringstream os;
            os << "pole density vanishes at E = " << e;
            throw InvalidParameter("esm_expand: " + os.str());
        }
        x.coefficients.push_back(target(I * e).imag() / (std::numbers::pi * nu));
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    x.continuum_tail = continuum_tail;
    x.support_lo = lo - 0.5 / density(lo);
    x.support_hi = hi + 0.5 / density(hi);
    x.poles = std::move(poles);
    x.density = std::move(density);
    x.target = std::move(target);
    return x;
}

double kramers_kronig_residual(const EsmExpansion& x, const std::vector<double>& omegas, double offset)
{
    double worst = 0.0;
    for (double w : omegas) {
        const cplx z{offset, w};
        worst = std::max(worst, std::abs(x.evaluate(z).real() - x.target(z).real()));
    }
    return worst;
}

double fit_rate_from_greens(const ComplexFn& greens, double donor_energy, double offset)
{
    if (!(offset > 0.0)) throw InvalidParameter("fit_rate_from_greens: offset must be > 0");
    const cplx z{offset, -donor_energy};
    const cplx g = greens(z);
    if (g == 0.0 || !std::isfinite(std::abs(g)))
        throw NumericError("numerics.fit_rate_from_greens", "Green's function vanishes at the fit point");
    return 2.0 * (1.0 / g - (z + I * donor_energy)).real();
}

double fit_rate_extrapolated(const ComplexFn& greens, double donor_energy, double offset)
{
    return 2.0 * fit_rate_from_greens(greens, donor_energy, offset) -
           fit_rate_from_greens(greens, donor_energy, 2.0 * offset);
}

double default_fit_offset(const SystemParams& p, double donor_energy)
{
    const double nu = total_dos(donor_energy, p);
    if (!(nu > 0.0)) throw NumericError("numerics.default_fit_offset", "density of states vanishes");
    return std::sqrt(p.rabi_frequency() / nu);
}

}  // namespace polariton
