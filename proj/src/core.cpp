#include "polariton/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace polariton {

double SystemParams::collective_coupling() const
{
    return coupling * std::sqrt(static_cast<double>(emitter_count));
}

double SystemParams::rabi_frequency() const { return 2.0 * collective_coupling(); }

std::uint64_t SplitMix64::mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next()
{
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
}

double SplitMix64::uniform()
{
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t SplitMix64::stream_seed(std::uint64_t base, std::uint64_t index)
{
    return mix(mix(base) ^ mix(index + 0x632be59bd9b4e019ULL));
}

double lorentz_pdf(double energy, double center, double width)
{
    if (!(width > 0.0))
        throw InvalidParameter("lorentz_pdf: disorder_width must be > 0");
    const double x = energy - center;
    return width / (std::numbers::pi * (x * x + width * width));
}

double lorentz_cdf(double energy, double center, double width)
{
    if (!(width > 0.0))
        throw InvalidParameter("lorentz_cdf: disorder_width must be > 0");
    return 0.5 + std::atan((energy - center) / width) / std::numbers::pi;
}

double lorentz_quantile(double u, double center, double width)
{
    return center + width * std::tan(std::numbers::pi * (u - 0.5));
}

std::uint64_t params_hash(const SystemParams& p)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t word) {
        for (int i = 0; i < 8; ++i) {
            h ^= (word >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    feed(std::bit_cast<std::uint64_t>(p.cavity_energy));
    feed(std::bit_cast<std::uint64_t>(p.emitter_center));
    feed(std::bit_cast<std::uint64_t>(p.coupling));
    feed(static_cast<std::uint64_t>(p.emitter_count));
    feed(std::bit_cast<std::uint64_t>(p.disorder_width));
    return h;
}

DisorderSample sample_disorder(const SystemParams& params, std::uint64_t seed,
                               const SamplingOptions& options)
{
    if (params.emitter_count < 1)
        throw InvalidParameter("sample_disorder: emitter_count must be ≥ 1");
    if (!(params.disorder_width >= 0.0))
        throw InvalidParameter("sample_disorder: disorder_width must be ≥ 0");
    if (options.tail_cutoff < 0.0)
        throw InvalidParameter("sample_disorder: tail cutoff must be ≥ 0");

    DisorderSample s;
    s.seed = seed;
    s.params_hash = params_hash(params);
    s.tail_cutoff = options.tail_cutoff;
    const auto n = static_cast<std::size_t>(params.emitter_count);
    const double center = params.emitter_center;
    const double width = params.disorder_width;

    if (width == 0.0) {
        s.energies.assign(n, center);
        return s;
    }

    s.energies.resize(n);
    SplitMix64 rng(seed);
    const double limit = options.tail_cutoff * width;
    for (auto& e : s.energies) {
        double v = lorentz_quantile(rng.uniform(), center, width);
        if (options.tail_cutoff > 0.0) {
            while (std::abs(v - center) > limit)
                v = lorentz_quantile(rng.uniform(), center, width);
        }
        e = v;
    }
    return s;
}

Validation validate(const SystemParams& p)
{
    Validation v;
    auto finite = [&v](double x, const char* name) {
        if (!std::isfinite(x)) v.errors.push_back(std::string(name) + " must be finite");
    };
    finite(p.cavity_energy, "cavity_energy");
    finite(p.emitter_center, "emitter_center");
    finite(p.coupling, "coupling");
    finite(p.disorder_width, "disorder_width");
    if (p.coupling < 0.0) v.errors.push_back("coupling must be ≥ 0");
    if (p.emitter_count < 1) v.errors.push_back("emitter_count must be ≥ 1");
    if (p.disorder_width < 0.0) v.errors.push_back("disorder_width must be ≥ 0");
    if (v.ok()) {
        const double gn = p.collective_coupling();
        if (!std::isfinite(gn)) {
            v.errors.push_back("collective coupling g*sqrt(N) is not finite");
        } else if (gn > 0.1 * std::min(p.cavity_energy, p.emitter_center)) {
            std::ostringstream os;
            os << "collective coupling " << gn << " eV exceeds 0.1*min(E_C, E_M)";
            v.warnings.push_back(os.str());
        }
    }
    return v;
}

Validation validate(const ReservoirParams& r)
{
    Validation v;
    for (double x : {r.acceptor_energy, r.reservoir_center, r.reservoir_width,
                     r.reservoir_coupling, r.acceptor_ldos_const}) {
        if (!std::isfinite(x)) {
            v.errors.push_back("reservoir parameters must be finite");
            break;
        }
    }
    if (!(r.reservoir_width > 0.0)) v.errors.push_back("reservoir_width must be > 0");
    if (r.reservoir_coupling < 0.0) v.errors.push_back("reservoir_coupling must be ≥ 0");
    if (r.reservoir_mode_count < 1) v.errors.push_back("reservoir_mode_count must be ≥ 1");
    return v;
}

}  // namespace polariton
