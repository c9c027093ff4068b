#pragma once

#include "polariton/core.hpp"
#include "polariton/spectra.hpp"

#include <string>
#include <vector>

namespace polariton {

enum class RateKind {
    RelaxEnergyResolved,
    RelaxAveraged,
    TransportEnergyResolved,
    TransportResonant,
    TransportAveraged
};

enum class Provenance { Analytic, Ensemble };

struct RateResult {
    double value = 0.0;  // eV with hbar = 1
    RateKind kind = RateKind::RelaxEnergyResolved;
    Provenance provenance = Provenance::Analytic;
    std::int64_t samples = 0;    // ensemble only
    double std_error = 0.0;      // ensemble only
    std::int64_t dropped = 0;    // ensemble samples rejected
    std::vector<std::string> warnings;

    // Mean first-passage time.
    double inverse() const { return 1.0 / value; }
};

std::string to_string(RateKind k);

RateResult relaxation_rate(double donor_energy, const SystemParams& params);
RateResult avg_relaxation_rate(const SystemParams& params);

double acceptor_ldos(double energy, const ReservoirParams& reservoir);

RateResult transport_rate(double energy, const SystemParams& params, const ReservoirParams& reservoir,
                          DosForm form = DosForm::Partition);
RateResult resonant_transport_rate(double donor_energy, const SystemParams& params, double acceptor_ldos_const,
                                   DosForm form = DosForm::Partition);
RateResult avg_transport_rate(const SystemParams& params, std::int64_t acceptors = 1);

}  // namespace polariton
