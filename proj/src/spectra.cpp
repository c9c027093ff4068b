#include "polariton/spectra.hpp"

#include "polariton/effham.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace polariton {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

void require_disorder(const SystemParams& p, const char* where)
{
    if (!(p.disorder_width > 0.0))
        throw InvalidParameter(std::string(where) +
                               ": disorder_width must be > 0; use the finite-size path for delta peaks");
}

double collective2(const SystemParams& p)
{
    return p.coupling * p.coupling * static_cast<double>(p.emitter_count);
}

// Averaged cavity function as a rational function, regular where the
// emitter pole cancels.
cplx averaged_cavity(cplx z, const SystemParams& p)
{
    const cplx w = z + I * p.emitter_center + p.disorder_width;
    return w / ((z + I * p.cavity_energy) * w + collective2(p));
}

std::string format_double(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

double cavity_ldos(double omega, const SystemParams& p)
{
    require_disorder(p, "cavity_ldos");
    const double s = p.disorder_width;
    const double dm = p.emitter_center - omega;
    const double dc = p.cavity_energy - omega;
    const double q = dm * dm + s * s;
    const double c = collective2(p);
    // kappa form multiplied through by q = (E_M - w)^2 + sigma^2
    const double a = q * dc - c * dm;
    const double b = c * s;
    if (b == 0.0) return dc == 0.0 ? INFINITY : 0.0;
    return c * s * q / (kPi * (a * a + b * b));
}

std::pair<cplx, cplx> cavity_residues(const SystemParams& p)
{
    const EigenPair e = eigenenergies(p);
    const cplx w0 = I * p.emitter_center + p.disorder_width;
    const cplx a1 = (-I * e.eps1 + w0) / (-I * e.eps1 + I * e.eps2);
    const cplx a2 = (-I * e.eps2 + w0) / (-I * e.eps2 + I * e.eps1);
    return {a1, a2};
}

double cavity_ldos_poles(double omega, const SystemParams& p)
{
    require_disorder(p, "cavity_ldos_poles");
    const EigenPair e = eigenenergies(p);
    const auto [a1, a2] = cavity_residues(p);
    return -(a1 / (omega - e.eps1) + a2 / (omega - e.eps2)).imag() / kPi;
}

double cavity_absorption(double omega, const SystemParams& p) { return kPi * cavity_ldos(omega, p); }

double bright_state_ldos(double omega, const SystemParams& p)
{
    require_disorder(p, "bright_state_ldos");
    const double s = p.disorder_width;
    if (collective2(p) == 0.0) return lorentz_pdf(omega, p.emitter_center, s);
    const double dc = p.cavity_energy - omega;
    const double x = (p.emitter_center - omega) * dc - collective2(p);
    const double num = s * dc * dc;
    return num / (kPi * (s * s * dc * dc + x * x));
}

double bright_state_ldos_poles(double omega, const SystemParams& p)
{
    require_disorder(p, "bright_state_ldos_poles");
    const EigenPair e = eigenenergies(p);
    const cplx b1 = (p.cavity_energy - e.eps1) / (e.eps2 - e.eps1);
    const cplx b2 = (p.cavity_energy - e.eps2) / (e.eps1 - e.eps2);
    return -(b1 / (omega - e.eps1) + b2 / (omega - e.eps2)).imag() / kPi;
}

double matter_absorption(double omega, const SystemParams& p, const ProbeParams& probe)
{
    require_disorder(p, "matter_absorption");
    // N D^2 pi nu_BS with the pi cancelled; extended precision keeps the
    // absolute error far below the 1e-10 level of large peak values.
    using ld = long double;
    const ld s = p.disorder_width;
    const ld dc = static_cast<ld>(p.cavity_energy) - omega;
    const ld x = (static_cast<ld>(p.emitter_center) - omega) * dc - static_cast<ld>(collective2(p));
    const ld n = static_cast<ld>(p.emitter_count);
    const ld d2 = static_cast<ld>(probe.dipole) * probe.dipole;
    return static_cast<double>(n * d2 * s * dc * dc / (s * s * dc * dc + x * x));
}

double matter_absorption_shifted(double omega, const SystemParams& p, const ProbeParams& probe)
{
    require_disorder(p, "matter_absorption_shifted");
    // The shifted argument cancels against E_M inside the cavity function;
    // evaluate in extended precision so that cancellation stays harmless.
    using ld = long double;
    using lc = std::complex<ld>;
    const lc i{0.0L, 1.0L};
    const lc z = i * (static_cast<ld>(omega) - p.cavity_energy - p.emitter_center) - static_cast<ld>(p.disorder_width);
    const lc w = z + i * static_cast<ld>(p.emitter_center) + static_cast<ld>(p.disorder_width);
    const lc g = w / ((z + i * static_cast<ld>(p.cavity_energy)) * w + static_cast<ld>(collective2(p)));
    const ld n = static_cast<ld>(p.emitter_count);
    const ld d2 = static_cast<ld>(probe.dipole) * probe.dipole;
    return static_cast<double>(n * d2 * (-g).real());
}

double dark_state_ldos(double omega, const SystemParams& p)
{
    require_disorder(p, "dark_state_ldos");
    return static_cast<double>(p.emitter_count - 1) * lorentz_pdf(omega, p.emitter_center, p.disorder_width);
}

double total_dos(double omega, const SystemParams& p, DosForm form)
{
    require_disorder(p, "total_dos");
    if (form == DosForm::Thermodynamic)
        return static_cast<double>(p.emitter_count) * lorentz_pdf(omega, p.emitter_center, p.disorder_width);
    return cavity_ldos(omega, p) + bright_state_ldos(omega, p) + dark_state_ldos(omega, p);
}

std::vector<double> default_grid(const SystemParams& p, std::size_t points)
{
    if (points < 2) throw InvalidParameter("default_grid: need at least 2 points");
    const double pad = std::max(5.0 * p.disorder_width, 2.0 * p.rabi_frequency());
    const double lo = std::min(p.emitter_center, p.cavity_energy) - pad;
    const double hi = std::max(p.emitter_center, p.cavity_energy) + pad;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

double default_broadening(const std::vector<double>& grid, const SystemParams& p)
{
    const double step = grid.size() > 1 ? (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1) : 0.0;
    double level = 0.0;
    if (p.disorder_width > 0.0)
        level = 5.0 * kPi * p.disorder_width / static_cast<double>(p.emitter_count);
    return std::max(10.0 * step, level);
}

Spectrum finite_size_ldos(SiteIndex site, const std::vector<double>& grid, const DisorderSample& sample,
                          const SystemParams& params, double broadening)
{
    if (!(broadening > 0.0)) throw InvalidParameter("finite_size_ldos: broadening must be > 0");
    Spectrum out;
    out.grid = grid;
    auto& values = out.channels["ldos"];
    values.reserve(grid.size());
    for (double w : grid) {
        const cplx gxx = greens_element(site, site, cplx(broadening, -w), sample, params);
        values.push_back(gxx.real() / kPi);
    }
    out.metadata["broadening"] = format_double(broadening);
    out.metadata["seed"] = std::to_string(sample.seed);
    return out;
}

Spectrum analytic_spectrum(const std::vector<double>& grid, const SystemParams& p, const ProbeParams& probe)
{
    Spectrum out;
    out.grid = grid;
    auto& nc = out.channels["nu_C"];
    auto& xc = out.channels["chi_C"];
    auto& nb = out.channels["nu_BS"];
    auto& xm = out.channels["chi_M"];
    auto& nd = out.channels["nu_DS"];
    auto& nt = out.channels["nu_total"];
    for (double w : grid) {
        nc.push_back(cavity_ldos(w, p));
        xc.push_back(cavity_absorption(w, p));
        nb.push_back(bright_state_ldos(w, p));
        xm.push_back(matter_absorption(w, p, probe));
        nd.push_back(dark_state_ldos(w, p));
        nt.push_back(nc.back() + nb.back() + nd.back());
    }
    return out;
}

double integrate_density(const std::function<double(double)>& f, double center, double half_width,
                         double step)
{
    if (!(half_width > 0.0) || !(step > 0.0))
        throw InvalidParameter("integrate_density: window and step must be > 0");
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * half_width / step));
    const double a = center - half_width;
    const double h = 2.0 * half_width / static_cast<double>(n);
    double sum = 0.5 * (f(a) + f(center + half_width));
    for (std::size_t i = 1; i < n; ++i) sum += f(a + h * static_cast<double>(i));
    const double tails = (f(a) + f(center + half_width)) * half_width;
    return sum * h + tails;
}

}  // namespace polariton
