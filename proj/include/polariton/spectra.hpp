#pragma once

#include "polariton/core.hpp"
#include "polariton/greens.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace polariton {

struct Spectrum {
    std::vector<double> grid;
    std::map<std::string, std::vector<double>> channels;
    std::map<std::string, std::string> metadata;
};

// Which total density of states to use: the exact partition
// nu_C + nu_BS + (N-1) P, or the large-N form N P.
enum class DosForm { Partition, Thermodynamic };

double cavity_ldos(double omega, const SystemParams& params);
// Same quantity from the two-pole residue expansion; diverges at the
// exceptional point.
double cavity_ldos_poles(double omega, const SystemParams& params);
// Residues A_1, A_2 of the averaged cavity function at its two poles.
std::pair<cplx, cplx> cavity_residues(const SystemParams& params);

double cavity_absorption(double omega, const SystemParams& params);

double bright_state_ldos(double omega, const SystemParams& params);
double bright_state_ldos_poles(double omega, const SystemParams& params);

double matter_absorption(double omega, const SystemParams& params, const ProbeParams& probe);
// Evaluated through the averaged cavity function at a complex-shifted argument.
double matter_absorption_shifted(double omega, const SystemParams& params, const ProbeParams& probe);

double dark_state_ldos(double omega, const SystemParams& params);
double total_dos(double omega, const SystemParams& params, DosForm form = DosForm::Partition);

std::vector<double> default_grid(const SystemParams& params, std::size_t points = 2001);
double default_broadening(const std::vector<double>& grid, const SystemParams& params);

Spectrum finite_size_ldos(SiteIndex site, const std::vector<double>& grid, const DisorderSample& sample,
                          const SystemParams& params, double broadening);

// Analytic spectrum with every channel on one grid.
Spectrum analytic_spectrum(const std::vector<double>& grid, const SystemParams& params,
                           const ProbeParams& probe = {});

// Integral over the real line of a density decaying at least like 1/w^2:
// trapezoid on [center - half_width, center + half_width] plus a 1/w^2 tail.
double integrate_density(const std::function<double(double)>& f, double center, double half_width,
                         double step);

}  // namespace polariton
