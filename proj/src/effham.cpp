#include "polariton/effham.hpp"

#include <cmath>

namespace polariton {

namespace {

using cplx = std::complex<double>;

EigenPair ordered(cplx a, cplx b)
{
    if (b.real() < a.real() || (b.real() == a.real() && b.imag() < a.imag())) std::swap(a, b);
    return {a, b, (b - a).real(), Regime::OffResonant};
}

bool resonant(const SystemParams& p)
{
    return std::abs(p.cavity_energy - p.emitter_center) <= kResonanceTolerance;
}

}  // namespace

std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::Underdamped: return "underdamped";
    case Regime::ExceptionalPoint: return "exceptional_point";
    case Regime::Overdamped: return "overdamped";
    case Regime::OffResonant: return "off_resonant";
    }
    return "unknown";
}

EffectiveHamiltonian effective_hamiltonian(const SystemParams& p)
{
    const double half_rabi = p.collective_coupling();
    const cplx dark{p.emitter_center, -p.disorder_width};
    EffectiveHamiltonian h;
    h.bright_block << cplx(p.cavity_energy), cplx(half_rabi), cplx(half_rabi), dark;
    h.dark_block = dark;
    return h;
}

Regime classify_regime(const SystemParams& p)
{
    if (!resonant(p)) return Regime::OffResonant;
    const double omega = p.rabi_frequency();
    if (std::abs(p.disorder_width - omega) <= kExceptionalPointTolerance) return Regime::ExceptionalPoint;
    return p.disorder_width < omega ? Regime::Underdamped : Regime::Overdamped;
}

EigenPair eigenenergies(const SystemParams& p)
{
    const double omega = p.rabi_frequency();
    const cplx detuning{p.cavity_energy - p.emitter_center, p.disorder_width};
    const cplx root = std::sqrt(detuning * detuning + omega * omega);
    const cplx mean = 0.5 * cplx(p.cavity_energy + p.emitter_center, -p.disorder_width);
    EigenPair e = ordered(mean - 0.5 * root, mean + 0.5 * root);
    e.regime = classify_regime(p);
    return e;
}

EigenPair asymptotic_eigenenergies(const SystemParams& p)
{
    if (!resonant(p))
        throw InvalidParameter("asymptotic_eigenenergies: expansions hold only for a resonant system");
    const double omega = p.rabi_frequency();
    const double s = p.disorder_width;
    const double ratio = s / omega;
    const double em = p.emitter_center;
    EigenPair e;
    if (ratio < 0.3) {
        const double shift = 0.5 * omega - s * s / (4.0 * omega);
        e = ordered(cplx(em - shift, -0.5 * s), cplx(em + shift, -0.5 * s));
    } else if (ratio > 3.0) {
        const double q = omega * omega / (4.0 * s);
        e = ordered(cplx(em, -s + q), cplx(em, -q));
    } else {
        throw InvalidParameter("asymptotic_eigenenergies: sigma/Omega must be < 0.3 or > 3");
    }
    e.regime = classify_regime(p);
    return e;
}

double exceptional_point_width(const SystemParams& p)
{
    if (!resonant(p))
        throw InvalidParameter("exceptional_point_width: no exceptional point off resonance");
    return p.rabi_frequency();
}

}  // namespace polariton
