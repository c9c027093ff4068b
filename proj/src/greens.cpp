#include "polariton/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace polariton {

namespace {

constexpr cplx I{0.0, 1.0};

bool collides(cplx w, double energy)
{
    return std::abs(w) < 1e-12 * std::max(1.0, std::abs(energy));
}

void check_site(SiteIndex s, std::int64_t n, const char* where)
{
    switch (s.kind) {
    case SiteIndex::Kind::Cavity:
    case SiteIndex::Kind::BrightState:
        return;
    case SiteIndex::Kind::Emitter:
        if (s.index < 1 || s.index > n)
            throw InvalidParameter(std::string(where) + ": emitter index out of range");
        return;
    case SiteIndex::Kind::DarkState:
        if (s.index < 1 || s.index > n - 1)
            throw InvalidParameter(std::string(where) + ": dark-state index out of range");
        return;
    }
}

// Amplitude <j|X> of an emitter-sector basis state (0-based j).
cplx amplitude(SiteIndex s, std::size_t j, std::int64_t n)
{
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    switch (s.kind) {
    case SiteIndex::Kind::Emitter:
        return static_cast<std::int64_t>(j) + 1 == s.index ? 1.0 : 0.0;
    case SiteIndex::Kind::BrightState:
        return norm;
    case SiteIndex::Kind::DarkState: {
        const double k = 2.0 * std::numbers::pi * static_cast<double>(s.index) / static_cast<double>(n);
        const double phase = k * static_cast<double>(j + 1);
        return std::polar(norm, phase);
    }
    case SiteIndex::Kind::Cavity:
        break;
    }
    return 0.0;
}

// Combine projections into a matrix element. alpha = <x|u>, beta = <u|y> summed
// over emitters, cross = sum conj(a_j) b_j u_j, denom = z + i E_C(z).
cplx assemble(SiteIndex x, SiteIndex y, cplx alpha, cplx beta, cplx cross, cplx denom, double g)
{
    const bool xc = x.kind == SiteIndex::Kind::Cavity;
    const bool yc = y.kind == SiteIndex::Kind::Cavity;
    if (xc && yc) return 1.0 / denom;
    if (xc) return -I * g * beta / denom;
    if (yc) return -I * g * alpha / denom;
    return cross - g * g * alpha * beta / denom;
}

}  // namespace

cplx aux_cavity_energy(cplx z, const DisorderSample& sample, const SystemParams& params)
{
    const double g2 = params.coupling * params.coupling;
    cplx sum = 0.0;
    for (std::size_t j = 0; j < sample.energies.size(); ++j) {
        const double e = sample.energies[j];
        const cplx w = z + I * e;
        if (collides(w, e)) {
            std::ostringstream os;
            os << "z collides with the pole of emitter " << j + 1;
            throw PoleCollision("greens.aux_cavity_energy", static_cast<std::int64_t>(j) + 1, os.str());
        }
        sum += 1.0 / w;
    }
    return params.cavity_energy - I * g2 * sum;
}

cplx greens_element(SiteIndex x, SiteIndex y, cplx z, const DisorderSample& sample,
                    const SystemParams& params)
{
    const auto n = static_cast<std::int64_t>(sample.energies.size());
    check_site(x, n, "greens_element");
    check_site(y, n, "greens_element");
    const double g = params.coupling;

    std::vector<cplx> u(sample.energies.size());
    cplx usum = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double e = sample.energies[j];
        const cplx w = z + I * e;
        if (collides(w, e)) {
            std::ostringstream os;
            os << "z collides with the pole of emitter " << j + 1;
            throw PoleCollision("greens.greens_element", static_cast<std::int64_t>(j) + 1, os.str());
        }
        u[j] = 1.0 / w;
        usum += u[j];
    }
    const cplx denom = z + I * params.cavity_energy + g * g * usum;
    if (std::abs(denom) == 0.0)
        throw PoleCollision("greens.greens_element", 0, "z is a pole of the cavity denominator");

    cplx alpha = 0.0, beta = 0.0, cross = 0.0;
    const bool xs = x.kind == SiteIndex::Kind::Emitter;
    const bool ys = y.kind == SiteIndex::Kind::Emitter;
    if (x.kind != SiteIndex::Kind::Cavity && y.kind != SiteIndex::Kind::Cavity && xs && ys) {
        const auto i = static_cast<std::size_t>(x.index - 1);
        const auto j = static_cast<std::size_t>(y.index - 1);
        alpha = u[i];
        beta = u[j];
        cross = i == j ? u[i] : 0.0;
    } else {
        for (std::size_t j = 0; j < u.size(); ++j) {
            const cplx a = x.kind == SiteIndex::Kind::Cavity ? 0.0 : std::conj(amplitude(x, j, n));
            const cplx b = y.kind == SiteIndex::Kind::Cavity ? 0.0 : amplitude(y, j, n);
            alpha += a * u[j];
            beta += b * u[j];
            cross += a * b * u[j];
        }
    }
    return assemble(x, y, alpha, beta, cross, denom, g);
}

cplx averaged_greens_element(SiteIndex x, SiteIndex y, cplx z, const SystemParams& params)
{
    const std::int64_t n = params.emitter_count;
    check_site(x, n, "averaged_greens_element");
    check_site(y, n, "averaged_greens_element");
    const double g = params.coupling;
    const cplx w = z + I * params.emitter_center + params.disorder_width;
    if (collides(w, params.emitter_center))
        throw PoleCollision("greens.averaged_greens_element", 0, "z collides with the averaged emitter pole");
    const cplx u = 1.0 / w;
    const double nn = static_cast<double>(n);
    const cplx denom = z + I * params.cavity_energy + g * g * nn * u;
    if (std::abs(denom) == 0.0)
        throw PoleCollision("greens.averaged_greens_element", 0, "z is a pole of the cavity denominator");

    // Projection of each basis state onto the uniform emitter vector.
    auto overlap = [&](SiteIndex s) -> double {
        switch (s.kind) {
        case SiteIndex::Kind::Emitter: return 1.0;
        case SiteIndex::Kind::BrightState: return std::sqrt(nn);
        default: return 0.0;
        }
    };
    const cplx alpha = overlap(x) * u;
    const cplx beta = overlap(y) * u;
    cplx cross = 0.0;
    if (x.kind != SiteIndex::Kind::Cavity && y.kind != SiteIndex::Kind::Cavity) {
        if (x == y) {
            cross = u;
        } else if ((x.kind == SiteIndex::Kind::Emitter) != (y.kind == SiteIndex::Kind::Emitter)) {
            // mixed emitter / collective state
            const SiteIndex e = x.kind == SiteIndex::Kind::Emitter ? x : y;
            const SiteIndex c = x.kind == SiteIndex::Kind::Emitter ? y : x;
            cplx a = amplitude(c, static_cast<std::size_t>(e.index - 1), n);
            if (c == x) a = std::conj(a);
            cross = a * u;
        }
    }
    return assemble(x, y, alpha, beta, cross, denom, g);
}

double ArrowheadSpectrum::gap(std::size_t root, std::size_t emitter) const
{
    const Root& r = roots[root];
    const double e = groups[group_of[emitter]].energy;
    if (r.kind == Root::Kind::Secular) return r.offset - (e - groups[r.origin].energy);
    return r.energy - e;
}

namespace {

struct Secular {
    const std::vector<double>& pole;
    const std::vector<double>& weight;  // squared couplings
    double cavity;

    // F(tau) = tau * f(e_p + tau) with the p-th pole removed, and dF/dtau.
    void eval(std::size_t p, double tau, double& value, double& slope) const
    {
        double s = 0.0, ds = 0.0;
        const double ep = pole[p];
        for (std::size_t k = 0; k < pole.size(); ++k) {
            if (k == p) continue;
            const double d = tau - (pole[k] - ep);
            const double q = weight[k] / d;
            s += q;
            ds += q / d;
        }
        const double f = (ep - cavity) + tau - s;
        value = tau * f - weight[p];
        slope = f + tau * (1.0 + ds);
    }

    // Root with F < 0 at tau = 0 and F >= 0 at `far`.
    double solve(std::size_t p, double far) const
    {
        double neg = 0.0, pos = far;
        double f, df;
        eval(p, 0.0, f, df);
        double tau = df != 0.0 ? -f / df : 0.5 * far;
        if (!((tau > std::min(neg, pos)) && (tau < std::max(neg, pos)))) tau = 0.5 * (neg + pos);
        for (int it = 0; it < 300; ++it) {
            eval(p, tau, f, df);
            if (f == 0.0) return tau;
            if (f < 0.0) neg = tau; else pos = tau;
            double next = tau - f / df;
            const double lo = std::min(neg, pos), hi = std::max(neg, pos);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double step = std::abs(next - tau);
            tau = next;
            if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(tau) ||
                hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
                return tau;
        }
        return tau;
    }

    // Plain f(lambda) at an offset from pole p.
    double f_at(std::size_t p, double tau) const
    {
        double s = 0.0;
        for (std::size_t k = 0; k < pole.size(); ++k) s += weight[k] / (tau - (pole[k] - pole[p]));
        return (pole[p] - cavity) + tau - s;
    }
};

}  // namespace

ArrowheadSpectrum arrowhead_spectrum(const DisorderSample& sample, const SystemParams& params,
                                     std::int64_t dense_limit)
{
    const std::size_t n = sample.energies.size();
    if (n == 0) throw InvalidParameter("arrowhead_spectrum: empty sample");
    if (static_cast<std::int64_t>(n) > dense_limit) {
        std::ostringstream os;
        os << "N = " << n << " exceeds the finite-size limit " << dense_limit
           << "; use the disorder-averaged analytic path";
        throw InvalidParameter("char_poly_poles: " + os.str());
    }
    const double g = params.coupling;
    const double ec = params.cavity_energy;

    ArrowheadSpectrum spec;
    spec.cavity_energy = ec;
    spec.coupling = g;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sample.energies[a] < sample.energies[b]; });
    spec.group_of.resize(n);
    for (std::size_t idx : order) {
        const double e = sample.energies[idx];
        if (spec.groups.empty() || spec.groups.back().energy != e) spec.groups.push_back({e, {}});
        spec.groups.back().members.push_back(idx);
        spec.group_of[idx] = spec.groups.size() - 1;
    }
    const std::size_t K = spec.groups.size();

    using Kind = ArrowheadSpectrum::Root::Kind;
    if (g == 0.0) {
        bool cavity_placed = false;
        for (std::size_t k = 0; k < K; ++k) {
            const auto& grp = spec.groups[k];
            if (!cavity_placed && ec <= grp.energy) {
                spec.roots.push_back({Kind::DecoupledCavity, ec, 1.0, 0, 0, 0.0, 1});
                cavity_placed = true;
            }
            spec.roots.push_back({Kind::DecoupledGroup, grp.energy, 0.0, k, 0, 0.0, 1});
            if (grp.members.size() > 1)
                spec.roots.push_back({Kind::Dark, grp.energy, 0.0, k, 0, 0.0, grp.members.size() - 1});
        }
        if (!cavity_placed) spec.roots.push_back({Kind::DecoupledCavity, ec, 1.0, 0, 0, 0.0, 1});
        return spec;
    }

    std::vector<double> pole(K), weight(K);
    double bnorm2 = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        pole[k] = spec.groups[k].energy;
        weight[k] = g * g * static_cast<double>(spec.groups[k].members.size());
        bnorm2 += weight[k];
    }
    const double bnorm = std::sqrt(bnorm2);
    const Secular sec{pole, weight, ec};

    auto cavity_weight = [&](std::size_t p, double tau) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double d = tau - (pole[k] - pole[p]);
            s += weight[k] / (d * d);
        }
        return 1.0 / (1.0 + s);
    };

    spec.roots.reserve(n + 1);
    for (std::size_t r = 0; r <= K; ++r) {
        std::size_t p;
        double far;
        if (r == 0) {
            p = 0;
            far = (std::min(ec, pole[0]) - pole[0]) - bnorm;
            far -= 1e-12 * (std::abs(far) + 1.0);
        } else if (r == K) {
            p = K - 1;
            far = (std::max(ec, pole[K - 1]) - pole[K - 1]) + bnorm;
            far += 1e-12 * (std::abs(far) + 1.0);
        } else {
            const double half = 0.5 * (pole[r] - pole[r - 1]);
            if (sec.f_at(r - 1, half) >= 0.0) {
                p = r - 1;
                far = half;
            } else {
                p = r;
                far = -half;
            }
        }
        const double tau = sec.solve(p, far);
        ArrowheadSpectrum::Root root;
        root.kind = Kind::Secular;
        root.origin = p;
        root.offset = tau;
        root.energy = pole[p] + tau;
        root.cavity_weight = cavity_weight(p, tau);
        spec.roots.push_back(root);
        if (r < K && spec.groups[r].members.size() > 1) {
            const auto m = spec.groups[r].members.size();
            spec.roots.push_back({Kind::Dark, pole[r], 0.0, r, 0, 0.0, m - 1});
        }
    }
    return spec;
}

PoleExpansion char_poly_poles(const DisorderSample& sample, const SystemParams& params,
                              std::int64_t dense_limit)
{
    const auto spec = arrowhead_spectrum(sample, params, dense_limit);
    PoleExpansion out;
    out.poles.reserve(sample.energies.size() + 1);
    for (const auto& r : spec.roots)
        for (std::size_t m = 0; m < r.multiplicity; ++m) out.poles.push_back(-I * r.energy);
    return out;
}

PoleExpansion residue_expansion(SiteIndex x, SiteIndex y, const ArrowheadSpectrum& spec)
{
    using Kind = ArrowheadSpectrum::Root::Kind;
    const auto n = static_cast<std::int64_t>(spec.group_of.size());
    for (SiteIndex s : {x, y}) {
        if (s.kind != SiteIndex::Kind::Cavity && s.kind != SiteIndex::Kind::Emitter)
            throw InvalidParameter("residue_expansion: only cavity and emitter sites are supported");
        check_site(s, n, "residue_expansion");
    }
    const double g = spec.coupling;

    PoleExpansion out;
    out.poles.reserve(spec.roots.size());
    out.amplitudes.reserve(spec.roots.size());
    for (std::size_t a = 0; a < spec.roots.size(); ++a) {
        const auto& r = spec.roots[a];
        // Eigenvector component on a site for non-degenerate roots.
        auto component = [&](SiteIndex s) -> double {
            const bool cav = s.kind == SiteIndex::Kind::Cavity;
            const auto j = cav ? 0 : static_cast<std::size_t>(s.index - 1);
            switch (r.kind) {
            case Kind::Secular:
                return cav ? std::sqrt(r.cavity_weight) : g * std::sqrt(r.cavity_weight) / spec.gap(a, j);
            case Kind::DecoupledCavity:
                return cav ? 1.0 : 0.0;
            case Kind::DecoupledGroup:
                if (cav || spec.group_of[j] != r.group) return 0.0;
                return 1.0 / std::sqrt(static_cast<double>(spec.groups[r.group].members.size()));
            case Kind::Dark:
                break;
            }
            return 0.0;
        };
        double amp;
        if (r.kind == Kind::Dark) {
            amp = 0.0;
            if (x.kind == SiteIndex::Kind::Emitter && y.kind == SiteIndex::Kind::Emitter) {
                const auto i = static_cast<std::size_t>(x.index - 1);
                const auto j = static_cast<std::size_t>(y.index - 1);
                if (spec.group_of[i] == r.group && spec.group_of[j] == r.group) {
                    const double m = static_cast<double>(spec.groups[r.group].members.size());
                    amp = (i == j ? 1.0 : 0.0) - 1.0 / m;
                }
            }
        } else {
            amp = component(x) * component(y);
        }
        out.poles.push_back(-I * r.energy);
        out.amplitudes.push_back(amp);
    }
    return out;
}

cplx inverse_laplace(const PoleExpansion& expansion, double t)
{
    if (t < 0.0) throw InvalidParameter("inverse_laplace: t must be ≥ 0 for a retarded function");
    if (expansion.poles.size() != expansion.amplitudes.size())
        throw InvalidParameter("inverse_laplace: poles and amplitudes differ in length");
    cplx sum = 0.0;
    for (std::size_t a = 0; a < expansion.poles.size(); ++a)
        sum += expansion.amplitudes[a] * std::exp(expansion.poles[a] * t);
    return sum;
}

}  // namespace polariton
