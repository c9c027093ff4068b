#include "polariton/ensemble.hpp"

#include "polariton/effham.hpp"

#include "polariton/numerics.hpp"
#include "polariton/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace polariton {

namespace {

constexpr cplx I{0.0, 1.0};

struct Stats {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t count = 0;
};

Stats summarize(const std::vector<double>& values, const std::vector<char>& ok)
{
    std::vector<double> kept;
    kept.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (ok[i]) kept.push_back(values[i]);
    Stats s;
    s.count = static_cast<std::int64_t>(kept.size());
    if (kept.empty()) return s;
    s.mean = pairwise_sum(kept) / static_cast<double>(kept.size());
    if (kept.size() > 1) {
        std::vector<double> sq(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) sq[i] = (kept[i] - s.mean) * (kept[i] - s.mean);
        const double var = pairwise_sum(sq) / static_cast<double>(kept.size() - 1);
        s.std_error = std::sqrt(var / static_cast<double>(kept.size()));
    }
    return s;
}

void check_config(const EnsembleConfig& cfg, const char* where)
{
    if (cfg.sample_count < 2) throw InvalidParameter(std::string(where) + ": sample_count must be ≥ 2");
    if (!(cfg.params.disorder_width > 0.0))
        throw InvalidParameter(std::string(where) + ": disorder_width must be > 0");
    const auto v = validate(cfg.params);
    if (!v.ok()) throw InvalidParameter(std::string(where) + ": " + v.errors.front());
}

RateResult finish(RateKind kind, const std::vector<double>& values, const std::vector<char>& ok,
                  std::int64_t requested)
{
    const Stats s = summarize(values, ok);
    RateResult r;
    r.kind = kind;
    r.provenance = Provenance::Ensemble;
    r.value = s.mean;
    r.std_error = s.std_error;
    r.samples = s.count;
    r.dropped = requested - s.count;
    if (s.count < 2) throw NumericError("ensemble", "fewer than two samples survived");
    if (100 * r.dropped > requested) {
        std::ostringstream os;
        os << r.dropped << " of " << requested << " samples dropped";
        r.warnings.push_back(os.str());
    }
    return r;
}

}  // namespace

DisorderSample ensemble_sample(const EnsembleConfig& cfg, std::uint64_t index)
{
    return sample_disorder(cfg.params, SplitMix64::stream_seed(cfg.base_seed, index), {cfg.tail_cutoff});
}

// A donor in a gap has few states around it, so the spacing rule alone overshoots.
double auto_fit_offset(const SystemParams& p, double e1)
{
    const EigenPair e = eigenenergies(p);
    const double reach = std::min(std::abs(e1 - e.eps1), std::abs(e1 - e.eps2));
    return std::min(2.0 / total_dos(e1, p), 0.05 * reach);
}

RateResult run_relaxation_ensemble(const EnsembleConfig& cfg, double donor_energy)
{
    check_config(cfg, "run_relaxation_ensemble");
    const auto m = static_cast<std::size_t>(cfg.sample_count);
    std::vector<double> values(m, 0.0);
    std::vector<char> ok(m, 0);
    const double two_pi = 2.0 * std::numbers::pi;

    parallel_for(m, resolve_threads(cfg.threads), [&](std::size_t i) {
        DisorderSample s = ensemble_sample(cfg, i);
        if (cfg.donor_mode == DonorMode::Pinned) s.energies[0] = donor_energy;
        const double e1 = s.energies[0];
        const ComplexFn g11 = [&](cplx z) {
            return greens_element(SiteIndex::emitter(1), SiteIndex::emitter(1), z, s, cfg.params);
        };
        try {
            double rate;
            if (cfg.fit_offset) {
                rate = fit_rate_from_greens(g11, e1, *cfg.fit_offset);
            } else {
                rate = fit_rate_extrapolated(g11, e1, auto_fit_offset(cfg.params, e1));
            }
            // fitted population decay is 2 pi g^2 nu_C
            values[i] = rate / two_pi;
            ok[i] = std::isfinite(values[i]);
        } catch (const NumericError&) {
            ok[i] = 0;
        }
    });
    return finish(RateKind::RelaxEnergyResolved, values, ok, cfg.sample_count);
}

Eigen::MatrixXcd transport_hamiltonian(const DisorderSample& s, const SystemParams& p, const ReservoirParams& r)
{
    const auto n = static_cast<Eigen::Index>(s.energies.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 2, n + 2);
    h(0, 0) = p.cavity_energy;
    for (Eigen::Index j = 0; j < n; ++j) {
        h(j + 1, j + 1) = s.energies[static_cast<std::size_t>(j)];
        h(0, j + 1) = h(j + 1, 0) = p.coupling;
    }
    const double c = std::sqrt(static_cast<double>(r.reservoir_mode_count)) * r.reservoir_coupling;
    h(n + 1, n + 1) = cplx(r.reservoir_center, -r.reservoir_width);
    h(n, n + 1) = h(n + 1, n) = c;
    return h;
}

std::vector<cplx> transport_eigenvalues(const DisorderSample& s, const SystemParams& p, const ReservoirParams& r)
{
    // H = A - i Sigma e e^T with A real symmetric and e the reservoir mode, so
    // the roots solve 1 + i Sigma sum_k w_k / (lambda - a_k) = 0.
    Eigen::MatrixXd a = transport_hamiltonian(s, p, r).real();
    const Eigen::Index n = a.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym(a);
    if (sym.info() != Eigen::Success) throw NumericError("ensemble.transport_eigenvalues", "symmetric eigensolve failed");
    const double sigma = r.reservoir_width;

    std::vector<cplx> roots;
    std::vector<double> poles, weights;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double w = sym.eigenvectors()(n - 1, k) * sym.eigenvectors()(n - 1, k);
        if (w < 1e-30) {
            roots.emplace_back(sym.eigenvalues()(k), 0.0);
        } else {
            poles.push_back(sym.eigenvalues()(k));
            weights.push_back(w);
        }
    }

    // Aberth iteration on prod(lambda - a_k) f(lambda).
    const std::size_t m = poles.size();
    std::vector<cplx> z(m);
    for (std::size_t k = 0; k < m; ++k) z[k] = cplx(poles[k], -sigma * weights[k]);
    bool converged = false;
    for (int it = 0; it < 500 && !converged; ++it) {
        converged = true;
        for (std::size_t i = 0; i < m; ++i) {
            cplx f = 1.0, df = 0.0, logd = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const cplx inv = 1.0 / (z[i] - poles[k]);
                f += I * sigma * weights[k] * inv;
                df -= I * sigma * weights[k] * inv * inv;
                logd += inv;
            }
            const cplx ratio = logd + df / f;
            cplx repel = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) repel += 1.0 / (z[i] - z[j]);
            const cplx step = 1.0 / (ratio - repel);
            if (!std::isfinite(std::abs(step))) {
                converged = false;
                it = 500;
                break;
            }
            z[i] -= step;
            if (std::abs(step) > 1e-14 * (1.0 + std::abs(z[i]))) converged = false;
        }
    }
    if (!converged) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> dense(transport_hamiltonian(s, p, r), false);
        if (dense.info() != Eigen::Success)
            throw NumericError("ensemble.transport_eigenvalues", "eigensolve failed");
        return {dense.eigenvalues().data(), dense.eigenvalues().data() + dense.eigenvalues().size()};
    }
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

RateResult run_transport_ensemble(const EnsembleConfig& cfg, double donor_energy)
{
    check_config(cfg, "run_transport_ensemble");
    if (!cfg.reservoir) throw InvalidParameter("run_transport_ensemble: reservoir not configured");
    if (cfg.params.emitter_count < 2) throw InvalidParameter("run_transport_ensemble: need donor and acceptor");
    const ReservoirParams res = *cfg.reservoir;
    const auto rv = validate(res);
    if (!rv.ok()) throw InvalidParameter("run_transport_ensemble: " + rv.errors.front());

    const auto m = static_cast<std::size_t>(cfg.sample_count);
    std::vector<double> values(m, 0.0);
    std::vector<char> ok(m, 0);
    const SystemParams& p = cfg.params;
    if (p.coupling == 0.0) {
        std::fill(ok.begin(), ok.end(), 1);
        return finish(RateKind::TransportEnergyResolved, values, ok, cfg.sample_count);
    }
    const double c2 = static_cast<double>(res.reservoir_mode_count) * res.reservoir_coupling * res.reservoir_coupling;
    const double c = std::sqrt(c2);

    parallel_for(m, resolve_threads(cfg.threads), [&](std::size_t i) {
        DisorderSample s = ensemble_sample(cfg, i);
        const std::size_t n = s.energies.size();
        if (cfg.donor_mode == DonorMode::Pinned) {
            s.energies[0] = donor_energy;
            s.energies[n - 1] = res.acceptor_energy;
        }
        std::vector<cplx> roots;
        try {
            roots = transport_eigenvalues(s, p, res);
        } catch (const NumericError&) {
            return;
        }

        // Right eigenvectors follow from the eigenvalue: cavity component 1.
        double num = 0.0, den = 0.0;
        for (const cplx lam : roots) {
            const cplx res_prop = 1.0 / (lam - res.reservoir_center + I * res.reservoir_width);
            double norm = 1.0;
            double donor = 0.0;
            for (std::size_t j = 0; j + 1 < n; ++j) {
                const double w = std::norm(p.coupling / (lam - s.energies[j]));
                norm += w;
                if (j == 0) donor = w;
            }
            const cplx acc = p.coupling / (lam - s.energies[n - 1] - c2 * res_prop);
            const double acceptor = std::norm(acc) + std::norm(c * acc * res_prop);
            norm += acceptor;
            if (!std::isfinite(norm)) continue;
            if (acceptor / norm >= 0.5) continue;
            num += donor / norm * (-lam.imag());
            den += donor / norm;
        }
        if (den > 0.0 && std::isfinite(num)) {
            // pole decay is the amplitude rate pi * Gamma
            values[i] = num / den / std::numbers::pi;
            ok[i] = 1;
        }
    });
    return finish(RateKind::TransportEnergyResolved, values, ok, cfg.sample_count);
}

Spectrum run_spectrum_ensemble(const EnsembleConfig& cfg, SiteIndex site, const std::vector<double>& grid,
                               double broadening)
{
    if (cfg.sample_count < 1) throw InvalidParameter("run_spectrum_ensemble: sample_count must be ≥ 1");
    if (!(broadening > 0.0)) throw InvalidParameter("run_spectrum_ensemble: broadening must be > 0");
    const auto m = static_cast<std::size_t>(cfg.sample_count);
    std::vector<std::vector<double>> rows(m);
    parallel_for(m, resolve_threads(cfg.threads), [&](std::size_t i) {
        const DisorderSample s = ensemble_sample(cfg, i);
        rows[i] = finite_size_ldos(site, grid, s, cfg.params, broadening).channels["ldos"];
    });

    Spectrum out;
    out.grid = grid;
    auto& mean = out.channels["ldos"];
    auto& err = out.channels["stderr"];
    mean.resize(grid.size());
    err.resize(grid.size());
    std::vector<double> column(m);
    const std::vector<char> all(m, 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (std::size_t i = 0; i < m; ++i) column[i] = rows[i][k];
        const Stats st = summarize(column, all);
        mean[k] = st.mean;
        err[k] = st.std_error;
    }
    std::ostringstream os;
    os.precision(17);
    os << broadening;
    out.metadata["broadening"] = os.str();
    out.metadata["samples"] = std::to_string(m);
    out.metadata["base_seed"] = std::to_string(cfg.base_seed);
    return out;
}

Spectrum eigenvalue_histogram(const EnsembleConfig& cfg, const std::vector<double>& edges)
{
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
        throw InvalidParameter("eigenvalue_histogram: need ascending bin edges");
    if (cfg.sample_count < 1) throw InvalidParameter("eigenvalue_histogram: sample_count must be ≥ 1");
    const auto m = static_cast<std::size_t>(cfg.sample_count);
    const std::size_t bins = edges.size() - 1;
    std::vector<std::vector<double>> counts(m, std::vector<double>(bins, 0.0));
    parallel_for(m, resolve_threads(cfg.threads), [&](std::size_t i) {
        const DisorderSample s = ensemble_sample(cfg, i);
        const auto spec = arrowhead_spectrum(s, cfg.params);
        for (const auto& r : spec.roots) {
            auto it = std::upper_bound(edges.begin(), edges.end(), r.energy);
            if (it == edges.begin() || it == edges.end()) continue;
            counts[i][static_cast<std::size_t>(it - edges.begin() - 1)] += static_cast<double>(r.multiplicity);
        }
    });
    Spectrum out;
    auto& dens = out.channels["density"];
    auto& err = out.channels["stderr"];
    std::vector<double> column(m);
    const std::vector<char> all(m, 1);
    for (std::size_t b = 0; b < bins; ++b) {
        const double width = edges[b + 1] - edges[b];
        out.grid.push_back(0.5 * (edges[b] + edges[b + 1]));
        for (std::size_t i = 0; i < m; ++i) column[i] = counts[i][b] / width;
        const Stats st = summarize(column, all);
        dens.push_back(st.mean);
        err.push_back(st.std_error);
    }
    out.metadata["samples"] = std::to_string(m);
    return out;
}

ComparisonReport compare(const std::function<double(double)>& analytic_fn,
                         const std::function<double(double)>& ensemble_fn, const std::vector<double>& points,
                         double tolerance)
{
    ComparisonReport rep;
    rep.points = points;
    rep.tolerance = tolerance;
    for (double x : points) {
        const double a = analytic_fn(x);
        const double e = ensemble_fn(x);
        rep.analytic.push_back(a);
        rep.ensemble.push_back(e);
        const double dev = a != 0.0 ? std::abs(e - a) / std::abs(a) : std::abs(e - a);
        rep.max_rel_dev = std::max(rep.max_rel_dev, dev);
    }
    rep.passed = rep.max_rel_dev <= tolerance;
    return rep;
}

}  // namespace polariton
