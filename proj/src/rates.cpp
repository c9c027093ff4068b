#include "polariton/rates.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace polariton {

std::string to_string(RateKind k)
{
    switch (k) {
    case RateKind::RelaxEnergyResolved: return "relax_energy_resolved";
    case RateKind::RelaxAveraged: return "relax_averaged";
    case RateKind::TransportEnergyResolved: return "transport_energy_resolved";
    case RateKind::TransportResonant: return "transport_resonant";
    case RateKind::TransportAveraged: return "transport_averaged";
    }
    return "unknown";
}

RateResult relaxation_rate(double donor_energy, const SystemParams& p)
{
    RateResult r;
    r.kind = RateKind::RelaxEnergyResolved;
    if (p.coupling == 0.0) return r;
    r.value = p.coupling * p.coupling * cavity_ldos(donor_energy, p);
    return r;
}

RateResult avg_relaxation_rate(const SystemParams& p)
{
    if (!(p.disorder_width > 0.0)) throw InvalidParameter("avg_relaxation_rate: disorder_width must be > 0");
    const double g2 = p.coupling * p.coupling;
    const double s = p.disorder_width;
    const double width = s + g2 * static_cast<double>(p.emitter_count) / (2.0 * s);
    const double detuning = p.emitter_center - p.cavity_energy;
    RateResult r;
    r.kind = RateKind::RelaxAveraged;
    r.value = g2 / std::numbers::pi * width / (detuning * detuning + width * width);
    return r;
}

double acceptor_ldos(double energy, const ReservoirParams& res)
{
    if (!(res.reservoir_width > 0.0)) throw InvalidParameter("acceptor_ldos: reservoir_width must be > 0");
    // Dressed acceptor resolvent at z = -iE.
    const std::complex<double> z{0.0, -energy};
    const std::complex<double> I{0.0, 1.0};
    const double strength = static_cast<double>(res.reservoir_mode_count) * res.reservoir_coupling *
                            res.reservoir_coupling;
    // decoupled acceptor: the delta peak is represented by a Lorentzian of
    // the reservoir width
    if (strength == 0.0) return lorentz_pdf(energy, res.acceptor_energy, res.reservoir_width);
    const auto self = strength / (z + I * res.reservoir_center + res.reservoir_width);
    const auto denom = z + I * res.acceptor_energy + self;
    if (std::abs(denom) == 0.0) return INFINITY;
    return (1.0 / denom).real() / std::numbers::pi;
}

RateResult transport_rate(double energy, const SystemParams& p, const ReservoirParams& res, DosForm form)
{
    if (p.coupling == 0.0) return {0.0, RateKind::TransportEnergyResolved};
    const double nu = total_dos(energy, p, form);
    if (!(nu > 0.0)) throw NumericError("rates.transport_rate", "total density of states vanishes");
    RateResult r;
    r.kind = RateKind::TransportEnergyResolved;
    r.value = p.coupling * p.coupling * cavity_ldos(energy, p) / nu * acceptor_ldos(energy, res);
    return r;
}

RateResult resonant_transport_rate(double donor_energy, const SystemParams& p, double nu0, DosForm form)
{
    if (p.coupling == 0.0) return {0.0, RateKind::TransportResonant};
    const double nu = total_dos(donor_energy, p, form);
    if (!(nu > 0.0)) throw NumericError("rates.resonant_transport_rate", "total density of states vanishes");
    RateResult r;
    r.kind = RateKind::TransportResonant;
    r.value = p.coupling * p.coupling * nu0 * cavity_ldos(donor_energy, p) / nu;
    return r;
}

RateResult avg_transport_rate(const SystemParams& p, std::int64_t acceptors)
{
    if (acceptors < 1) throw InvalidParameter("avg_transport_rate: need at least one acceptor");
    RateResult r = avg_relaxation_rate(p);
    r.kind = RateKind::TransportAveraged;
    const double n = static_cast<double>(p.emitter_count);
    r.value = r.value * static_cast<double>(acceptors) / n;
    if (10 * acceptors >= p.emitter_count) {
        std::ostringstream os;
        os << acceptors << " acceptors is not small compared to N = " << p.emitter_count;
        r.warnings.push_back(os.str());
    }
    return r;
}

}  // namespace polariton
