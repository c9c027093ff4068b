#pragma once

#include "polariton/core.hpp"
#include "polariton/greens.hpp"
#include "polariton/rates.hpp"
#include "polariton/spectra.hpp"

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

namespace polariton {

enum class DonorMode { Pinned, Sampled };

struct EnsembleConfig {
    SystemParams params;
    std::optional<ReservoirParams> reservoir;
    std::int64_t sample_count = 500;
    std::uint64_t base_seed = 1;
    // Unset: bias-corrected fit at auto_fit_offset.
    std::optional<double> fit_offset;
    DonorMode donor_mode = DonorMode::Pinned;
    int threads = 0;
    double tail_cutoff = 0.0;
};

// Sample `index` of the ensemble; independent of scheduling.
DisorderSample ensemble_sample(const EnsembleConfig& cfg, std::uint64_t index);

// Twice the level spacing at E1, capped at 5% of the distance to the nearest
// polariton pole.
double auto_fit_offset(const SystemParams& params, double donor_energy);

RateResult run_relaxation_ensemble(const EnsembleConfig& cfg, double donor_energy);
RateResult run_transport_ensemble(const EnsembleConfig& cfg, double donor_energy);
Spectrum run_spectrum_ensemble(const EnsembleConfig& cfg, SiteIndex site, const std::vector<double>& grid,
                               double broadening);
// Eigenvalue density of the finite system, averaged over samples.
Spectrum eigenvalue_histogram(const EnsembleConfig& cfg, const std::vector<double>& edges);

// Cavity, N emitters (acceptor last) and one complex-energy mode standing in
// for the Lorentz-disordered reservoir.
Eigen::MatrixXcd transport_hamiltonian(const DisorderSample& sample, const SystemParams& params,
                                       const ReservoirParams& reservoir);

// Eigenvalues of transport_hamiltonian. Only the reservoir mode is complex, so
// they follow from a rank-one secular equation; falls back to a dense solve.
std::vector<cplx> transport_eigenvalues(const DisorderSample& sample, const SystemParams& params,
                                        const ReservoirParams& reservoir);

struct ComparisonReport {
    std::vector<double> points;
    std::vector<double> analytic;
    std::vector<double> ensemble;
    double max_rel_dev = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

ComparisonReport compare(const std::function<double(double)>& analytic_fn,
                         const std::function<double(double)>& ensemble_fn, const std::vector<double>& points,
                         double tolerance);

}  // namespace polariton
