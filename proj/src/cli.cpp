#include "polariton/cli.hpp"

#include "polariton/effham.hpp"
#include "polariton/ensemble.hpp"
#include "polariton/rates.hpp"
#include "polariton/spectra.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace polariton::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::map<std::string, Mode> kModes = {
    {"eigs", Mode::Eigs},         {"spectra", Mode::Spectra}, {"relax", Mode::Relax},
    {"transport", Mode::Transport}, {"ensemble", Mode::Ensemble}, {"sweep", Mode::Sweep},
    {"reproduce-fig", Mode::ReproduceFig}};

const std::map<std::string, SweepAxis> kAxes = {
    {"sigma", SweepAxis::Sigma}, {"N", SweepAxis::N}, {"E1", SweepAxis::E1}};

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shortest %g form that parses back to the same double.
std::string exact(double v)
{
    char buf[40];
    for (int digits = 6; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string short_num(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

double parse_double(const std::string& s, const std::string& what)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(what + ": not a number: '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what)
{
    const double v = parse_double(s, what);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(what + ": not an integer: '" + s + "'");
    return static_cast<std::int64_t>(v);
}

// Byte offset to 1-based line and column.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Typed accessors that name the offending key.
double num(const json& j, const std::string& key)
{
    if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& key)
{
    const double v = num(j, key);
    if (v != std::floor(v)) throw ConfigError("config key '" + key + "' must be an integer");
    return static_cast<std::int64_t>(v);
}

std::string text(const json& j, const std::string& key)
{
    if (!j.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return j.get<std::string>();
}

bool boolean(const json& j, const std::string& key)
{
    if (!j.is_boolean()) throw ConfigError("config key '" + key + "' must be true or false");
    return j.get<bool>();
}

void require_object(const json& j, const std::string& key)
{
    if (!j.is_object()) throw ConfigError("config key '" + key + "' must be an object");
}

json to_json(const RunConfig& c)
{
    json j;
    j["mode"] = to_string(c.mode);
    j["E_C"] = c.params.cavity_energy;
    j["E_M"] = c.params.emitter_center;
    j["g"] = c.params.coupling;
    j["N"] = c.params.emitter_count;
    j["sigma"] = c.params.disorder_width;
    j["E1"] = c.donor_energy;
    if (c.reservoir) {
        const auto& r = *c.reservoir;
        j["reservoir"] = {{"E_N", r.acceptor_energy}, {"E_R", r.reservoir_center}, {"Sigma", r.reservoir_width},
                          {"g_R", r.reservoir_coupling}, {"N_R", r.reservoir_mode_count},
                          {"nu0", r.acceptor_ldos_const}};
    }
    if (c.probe) j["probe"] = {{"D", c.probe->dipole}};
    if (c.sweep_axis) {
        j["sweep"] = {{"axis", to_string(*c.sweep_axis)}};
        if (c.sweep_grid) j["sweep"]["grid"] = c.sweep_grid->str();
    }
    if (c.grid) j["grid"] = c.grid->str();
    j["ensemble"] = c.ensemble;
    j["samples"] = c.samples ? json(*c.samples) : json("auto");
    j["fit_offset"] = c.fit_offset ? json(*c.fit_offset) : json("auto");
    j["donor"] = c.sampled_donor ? "sampled" : "pinned";
    j["tail_cutoff"] = c.tail_cutoff;
    if (c.mode == Mode::ReproduceFig) {
        j["figure"] = c.figure;
        j["panel"] = c.panel;
    }
    j["output"] = {{"path", c.output}, {"format", c.format == Format::Csv ? "csv" : "json"}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

RunConfig from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "mode") {
            const auto m = kModes.find(text(v, key));
            if (m == kModes.end()) throw ConfigError("unknown mode '" + v.get<std::string>() + "'");
            c.mode = m->second;
        } else if (key == "E_C") {
            c.params.cavity_energy = num(v, key);
        } else if (key == "E_M") {
            c.params.emitter_center = num(v, key);
        } else if (key == "g") {
            c.params.coupling = num(v, key);
        } else if (key == "N") {
            c.params.emitter_count = integer(v, key);
        } else if (key == "sigma") {
            c.params.disorder_width = num(v, key);
        } else if (key == "E1") {
            c.donor_energy = num(v, key);
        } else if (key == "reservoir") {
            require_object(v, key);
            ReservoirParams r;
            for (const auto& [k, x] : v.items()) {
                const std::string full = "reservoir." + k;
                if (k == "E_N") r.acceptor_energy = num(x, full);
                else if (k == "E_R") r.reservoir_center = num(x, full);
                else if (k == "Sigma") r.reservoir_width = num(x, full);
                else if (k == "g_R") r.reservoir_coupling = num(x, full);
                else if (k == "N_R") r.reservoir_mode_count = integer(x, full);
                else if (k == "nu0") r.acceptor_ldos_const = num(x, full);
                else throw ConfigError("unknown config key '" + full + "'");
            }
            c.reservoir = r;
        } else if (key == "probe") {
            require_object(v, key);
            ProbeParams p;
            for (const auto& [k, x] : v.items()) {
                if (k == "D") p.dipole = num(x, "probe.D");
                else throw ConfigError("unknown config key 'probe." + k + "'");
            }
            c.probe = p;
        } else if (key == "sweep") {
            require_object(v, key);
            for (const auto& [k, x] : v.items()) {
                if (k == "axis") {
                    const auto a = kAxes.find(text(x, "sweep.axis"));
                    if (a == kAxes.end()) throw ConfigError("sweep axis must be one of sigma, N, E1");
                    c.sweep_axis = a->second;
                } else if (k == "grid") {
                    c.sweep_grid = parse_grid(text(x, "sweep.grid"));
                } else {
                    throw ConfigError("unknown config key 'sweep." + k + "'");
                }
            }
            if (c.sweep_axis.has_value() != c.sweep_grid.has_value())
                throw ConfigError("sweep needs both 'axis' and 'grid'");
        } else if (key == "grid") {
            c.grid = parse_grid(text(v, key));
        } else if (key == "ensemble") {
            c.ensemble = boolean(v, key);
        } else if (key == "samples") {
            if (v.is_string() && v.get<std::string>() == "auto") c.samples.reset();
            else c.samples = integer(v, key);
        } else if (key == "fit_offset") {
            if (v.is_null() || (v.is_string() && v.get<std::string>() == "auto")) c.fit_offset.reset();
            else c.fit_offset = num(v, key);
        } else if (key == "donor") {
            const std::string d = text(v, key);
            if (d != "pinned" && d != "sampled") throw ConfigError("donor must be 'pinned' or 'sampled'");
            c.sampled_donor = d == "sampled";
        } else if (key == "tail_cutoff") {
            c.tail_cutoff = num(v, key);
        } else if (key == "figure") {
            c.figure = static_cast<int>(integer(v, key));
        } else if (key == "panel") {
            c.panel = text(v, key);
        } else if (key == "output") {
            require_object(v, key);
            for (const auto& [k, x] : v.items()) {
                if (k == "path") {
                    c.output = text(x, "output.path");
                } else if (k == "format") {
                    const std::string f = text(x, "output.format");
                    if (f != "csv" && f != "json") throw ConfigError("output.format must be 'csv' or 'json'");
                    c.format = f == "csv" ? Format::Csv : Format::Json;
                } else {
                    throw ConfigError("unknown config key 'output." + k + "'");
                }
            }
        } else if (key == "seed") {
            const std::int64_t s = integer(v, key);
            if (s < 0) throw ConfigError("seed must be ≥ 0");
            c.seed = static_cast<std::uint64_t>(s);
        } else if (key == "threads") {
            c.threads = static_cast<int>(integer(v, key));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return c;
}

json parse_document(const std::string& body, const std::string& source)
{
    try {
        return json::parse(body, nullptr, true, true);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(body, e.byte);
        std::ostringstream os;
        os << source << ":" << line << ":" << col << ": parse error";
        throw ConfigError(os.str());
    }
}

// Checks that go beyond per-key typing; every problem is listed.
void validate_run(const RunConfig& c)
{
    std::vector<std::string> errors;
    const auto v = validate(c.params);
    errors.insert(errors.end(), v.errors.begin(), v.errors.end());
    if (c.reservoir) {
        const auto r = validate(*c.reservoir);
        errors.insert(errors.end(), r.errors.begin(), r.errors.end());
    }
    if (c.samples && *c.samples < 2) errors.push_back("samples must be ≥ 2");
    if (c.fit_offset && !(*c.fit_offset > 0.0)) errors.push_back("fit_offset must be > 0");
    if (c.threads < 0) errors.push_back("threads must be ≥ 0");
    if (c.tail_cutoff < 0.0) errors.push_back("tail_cutoff must be ≥ 0");
    if (c.sweep_axis) {
        if (*c.sweep_axis == SweepAxis::N && c.sweep_grid->lo < 1.0) errors.push_back("N sweep must start at ≥ 1");
        if (*c.sweep_axis == SweepAxis::E1 && (c.mode == Mode::Eigs))
            errors.push_back("eigs cannot sweep E1");
        if (c.mode == Mode::Spectra || c.mode == Mode::Ensemble || c.mode == Mode::ReproduceFig)
            errors.push_back(to_string(c.mode) + " does not take a sweep");
    } else if (c.mode == Mode::Sweep) {
        errors.push_back("sweep mode needs --sweep AXIS GRID");
    }
    if (c.mode == Mode::ReproduceFig) {
        static const std::map<int, std::string> panels = {
            {2, "abcd"}, {3, "abcdefghijkl"}, {4, "abcd"}, {5, "abcd"}, {6, "abcd"}};
        const auto it = panels.find(c.figure);
        if (it == panels.end()) errors.push_back("figure must be one of 2, 3, 4, 5, 6");
        else if (c.panel.size() != 1 || it->second.find(c.panel[0]) == std::string::npos)
            errors.push_back("figure " + std::to_string(c.figure) + " has panels " + it->second);
    }
    if (!errors.empty()) {
        std::string all;
        for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
        throw ConfigError(all);
    }
}

// ---------------------------------------------------------------- compute

void set_axis(SweepAxis axis, double x, SystemParams& p, double& e1)
{
    switch (axis) {
    case SweepAxis::Sigma: p.disorder_width = x; break;
    case SweepAxis::N: p.emitter_count = std::max<std::int64_t>(1, std::llround(x)); break;
    case SweepAxis::E1: e1 = x; break;
    }
}

std::vector<double> axis_values(const RunConfig& c, const SystemParams& p, double e1)
{
    if (c.sweep_grid) return c.sweep_grid->values();
    if (!c.sweep_axis) return {p.disorder_width};
    switch (*c.sweep_axis) {
    case SweepAxis::N: return {static_cast<double>(p.emitter_count)};
    case SweepAxis::E1: return {e1};
    default: return {p.disorder_width};
    }
}

EnsembleConfig ensemble_config(const RunConfig& c, const SystemParams& p, std::int64_t samples)
{
    EnsembleConfig e;
    e.params = p;
    e.reservoir = c.reservoir;
    e.sample_count = samples;
    e.base_seed = c.seed;
    e.fit_offset = c.fit_offset;
    e.donor_mode = c.sampled_donor ? DonorMode::Sampled : DonorMode::Pinned;
    e.threads = c.threads;
    e.tail_cutoff = c.tail_cutoff;
    return e;
}

std::int64_t auto_samples(std::int64_t n)
{
    return std::max<std::int64_t>(2, std::llround(1.0e6 / static_cast<double>(n)));
}

void add_warnings(Table& t, const RateResult& r)
{
    for (const auto& w : r.warnings) t.metadata.emplace_back("warning", w);
}

std::string fit_note(const RunConfig& c)
{
    return c.fit_offset ? fmt(*c.fit_offset) : "auto (extrapolated from 2/nu(E1) and 4/nu(E1))";
}

Table eigs_table(const RunConfig& c)
{
    Table t;
    const SweepAxis axis = c.sweep_axis.value_or(SweepAxis::Sigma);
    t.columns = {to_string(axis), "re_eps1", "im_eps1", "re_eps2", "im_eps2", "regime"};
    for (double x : axis_values(c, c.params, c.donor_energy)) {
        SystemParams p = c.params;
        double e1 = c.donor_energy;
        set_axis(axis, x, p, e1);
        const EigenPair e = eigenenergies(p);
        t.rows.push_back({x, e.eps1.real(), e.eps1.imag(), e.eps2.real(), e.eps2.imag(),
                          std::string(to_string(e.regime))});
    }
    return t;
}

Table relax_table(const RunConfig& c)
{
    Table t;
    const SweepAxis axis = c.sweep_axis.value_or(SweepAxis::Sigma);
    t.columns = {to_string(axis), "gamma", "gamma_avg"};
    if (c.ensemble) {
        for (const char* col : {"gamma_ens", "gamma_ens_stderr", "samples", "dropped"}) t.columns.emplace_back(col);
        t.metadata.emplace_back("fit_offset", fit_note(c));
        t.metadata.emplace_back("donor", c.sampled_donor ? "sampled (compare with gamma_avg)" : "pinned at E1");
    }
    for (double x : axis_values(c, c.params, c.donor_energy)) {
        SystemParams p = c.params;
        double e1 = c.donor_energy;
        set_axis(axis, x, p, e1);
        std::vector<Cell> row{x, relaxation_rate(e1, p).value, avg_relaxation_rate(p).value};
        if (c.ensemble) {
            const auto ec = ensemble_config(c, p, c.samples.value_or(auto_samples(p.emitter_count)));
            const RateResult r = run_relaxation_ensemble(ec, e1);
            add_warnings(t, r);
            row.insert(row.end(), {r.value, r.std_error, r.samples, r.dropped});
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table transport_table(const RunConfig& c)
{
    Table t;
    const SweepAxis axis = c.sweep_axis.value_or(SweepAxis::Sigma);
    const ReservoirParams res = c.reservoir.value_or(ReservoirParams{});
    t.columns = {to_string(axis), "Gamma", "Gamma_r", "Gamma_avg"};
    if (c.ensemble) {
        for (const char* col : {"Gamma_ens", "Gamma_ens_stderr", "samples", "dropped"}) t.columns.emplace_back(col);
        t.metadata.emplace_back("donor", c.sampled_donor ? "sampled (compare with Gamma_avg)" : "pinned at E1");
    }
    for (double x : axis_values(c, c.params, c.donor_energy)) {
        SystemParams p = c.params;
        double e1 = c.donor_energy;
        set_axis(axis, x, p, e1);
        const RateResult avg = avg_transport_rate(p);
        add_warnings(t, avg);
        std::vector<Cell> row{x, transport_rate(e1, p, res).value,
                              resonant_transport_rate(e1, p, res.acceptor_ldos_const).value, avg.value};
        if (c.ensemble) {
            auto ec = ensemble_config(c, p, c.samples.value_or(auto_samples(p.emitter_count)));
            ec.reservoir = res;
            const RateResult r = run_transport_ensemble(ec, e1);
            add_warnings(t, r);
            row.insert(row.end(), {r.value, r.std_error, r.samples, r.dropped});
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

const std::vector<std::string> kSpectrumChannels = {"nu_C", "chi_C", "nu_BS", "chi_M", "nu_DS", "nu_total"};

Table spectra_table(const RunConfig& c)
{
    Table t;
    const std::vector<double> grid = c.grid ? c.grid->values() : default_grid(c.params);
    const Spectrum s = analytic_spectrum(grid, c.params, c.probe.value_or(ProbeParams{}));
    t.columns = {"omega"};
    t.columns.insert(t.columns.end(), kSpectrumChannels.begin(), kSpectrumChannels.end());
    Spectrum ens;
    if (c.ensemble) {
        const double b = default_broadening(grid, c.params);
        const auto ec = ensemble_config(c, c.params, c.samples.value_or(auto_samples(c.params.emitter_count)));
        ens = run_spectrum_ensemble(ec, SiteIndex::cavity(), grid, b);
        t.columns.insert(t.columns.end(), {"nu_C_ens", "nu_C_ens_stderr"});
        t.metadata.emplace_back("broadening", fmt(b));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> row{grid[i]};
        for (const auto& ch : kSpectrumChannels) row.emplace_back(s.channels.at(ch)[i]);
        if (c.ensemble) row.insert(row.end(), {ens.channels.at("ldos")[i], ens.channels.at("stderr")[i]});
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table histogram_table(const RunConfig& c)
{
    Table t;
    const std::vector<double> edges = c.grid ? c.grid->values() : default_grid(c.params, 201);
    const auto ec = ensemble_config(c, c.params, c.samples.value_or(auto_samples(c.params.emitter_count)));
    const Spectrum h = eigenvalue_histogram(ec, edges);
    t.columns = {"energy", "density", "density_stderr", "nu_total"};
    for (std::size_t i = 0; i < h.grid.size(); ++i)
        t.rows.push_back({h.grid[i], h.channels.at("density")[i], h.channels.at("stderr")[i],
                          total_dos(h.grid[i], c.params)});
    t.metadata.emplace_back("samples", std::to_string(ec.sample_count));
    return t;
}

Table sweep_table(const RunConfig& c)
{
    Table t;
    const SweepAxis axis = *c.sweep_axis;
    const ReservoirParams res = c.reservoir.value_or(ReservoirParams{});
    t.columns = {to_string(axis), "re_eps1", "im_eps1", "re_eps2", "im_eps2", "regime",
                 "gamma", "gamma_avg", "Gamma_r", "Gamma_avg"};
    for (double x : c.sweep_grid->values()) {
        SystemParams p = c.params;
        double e1 = c.donor_energy;
        set_axis(axis, x, p, e1);
        const EigenPair e = eigenenergies(p);
        t.rows.push_back({x, e.eps1.real(), e.eps1.imag(), e.eps2.real(), e.eps2.imag(),
                          std::string(to_string(e.regime)), relaxation_rate(e1, p).value,
                          avg_relaxation_rate(p).value,
                          resonant_transport_rate(e1, p, res.acceptor_ldos_const).value,
                          avg_transport_rate(p).value});
    }
    return t;
}

// ------------------------------------------------------------- figures

SystemParams resonant(double sigma, std::int64_t n = 2000)
{
    return {1.0, 1.0, 0.001, n, sigma};
}

SystemParams detuned(double sigma, std::int64_t n = 2000)
{
    return {1.05, 0.95, 0.001, n, sigma};
}

const std::vector<double> kDonorsResonant = {0.85, 0.9375, 1.025, 1.2};
const std::vector<double> kDonorsDetuned = {0.85, 0.9375, 1.025, 1.125, 1.2, 2.0};
const std::vector<std::int64_t> kEnsembleSizes = {100, 1000, 2000, 10000};
const GridSpec kSigmaAxis{1e-3, 10.0, 121, true};
const GridSpec kNAxis{1.0, 1e7, 141, true};
constexpr std::int64_t kEnsembleNMax = 1000000;

Table figure_table(const RunConfig& c)
{
    const char panel = c.panel[0];
    Table t;
    RunConfig sub = c;
    sub.sweep_axis.reset();
    sub.sweep_grid.reset();

    if (c.figure == 2) {
        sub.params = (panel == 'a' || panel == 'c') ? resonant(0.04) : detuned(0.04);
        sub.sweep_axis = SweepAxis::Sigma;
        sub.sweep_grid = GridSpec{1e-3, 0.2, 200, true};
        return eigs_table(sub);
    }

    if (c.figure == 3) {
        const int k = panel - 'a';
        const int set = k / 3;
        const int kind = k % 3;
        sub.params = set == 0 ? resonant(0.04) : set == 1 ? resonant(0.15) : set == 2 ? detuned(0.04) : detuned(0.15);
        const std::vector<double> grid = c.grid ? c.grid->values() : default_grid(sub.params);
        const auto ec = ensemble_config(c, sub.params, c.samples.value_or(auto_samples(sub.params.emitter_count)));
        if (kind == 2) {
            t.columns = {"omega", "nu_total"};
            Spectrum h;
            if (c.ensemble) {
                h = eigenvalue_histogram(ec, grid);
                t.columns.insert(t.columns.end(), {"nu_total_ens", "nu_total_ens_stderr"});
                for (std::size_t i = 0; i < h.grid.size(); ++i)
                    t.rows.push_back({h.grid[i], total_dos(h.grid[i], sub.params), h.channels["density"][i],
                                      h.channels["stderr"][i]});
            } else {
                for (double w : grid) t.rows.push_back({w, total_dos(w, sub.params)});
            }
            return t;
        }
        const std::string name = kind == 0 ? "nu_C" : "nu_BS";
        t.columns = {"omega", name};
        Spectrum ens;
        if (c.ensemble) {
            const double b = default_broadening(grid, sub.params);
            ens = run_spectrum_ensemble(ec, kind == 0 ? SiteIndex::cavity() : SiteIndex::bright(), grid, b);
            t.columns.insert(t.columns.end(), {name + "_ens", name + "_ens_stderr"});
            t.metadata.emplace_back("broadening", fmt(b));
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double w = grid[i];
            std::vector<Cell> row{w, kind == 0 ? cavity_ldos(w, sub.params) : bright_state_ldos(w, sub.params)};
            if (c.ensemble) row.insert(row.end(), {ens.channels["ldos"][i], ens.channels["stderr"][i]});
            t.rows.push_back(std::move(row));
        }
        return t;
    }

    const bool res_panel = panel == 'a' || panel == 'c';
    const auto base = [&](double sigma, std::int64_t n) { return res_panel ? resonant(sigma, n) : detuned(sigma, n); };
    const std::vector<double>& donors = res_panel ? kDonorsResonant : kDonorsDetuned;
    const bool vs_sigma = c.figure == 4 || (c.figure == 6 && (panel == 'a' || panel == 'b'));
    const double fixed_sigma = res_panel ? 0.04 : 0.15;
    const std::vector<double> xs = (vs_sigma ? kSigmaAxis : kNAxis).values();
    t.columns = {vs_sigma ? "sigma" : "N"};
    const auto params_at = [&](double x, std::int64_t n) {
        SystemParams p = base(fixed_sigma, n);
        set_axis(vs_sigma ? SweepAxis::Sigma : SweepAxis::N, x, p, sub.donor_energy);
        return p;
    };

    if (c.figure == 6) {
        for (double e1 : donors) t.columns.push_back("Gamma_r[E1=" + short_num(e1) + "]");
        t.columns.emplace_back("Gamma_avg");
        const double nu0 = c.reservoir.value_or(ReservoirParams{}).acceptor_ldos_const;
        t.metadata.emplace_back("nu0", fmt(nu0));
        for (double x : xs) {
            const SystemParams p = params_at(x, 2000);
            std::vector<Cell> row{x};
            for (double e1 : donors) row.emplace_back(resonant_transport_rate(e1, p, nu0).value);
            row.emplace_back(avg_transport_rate(p).value);
            t.rows.push_back(std::move(row));
        }
        if (c.ensemble) t.metadata.emplace_back("note", "ensemble flag ignored for transport figures");
        return t;
    }

    // Figures 4 and 5: panels a, b resolve E1; panels c, d average over it.
    const bool resolved = panel == 'a' || panel == 'b';
    const auto ensemble_cell = [&](const SystemParams& p, double e1, bool pinned) -> std::vector<Cell> {
        if (p.emitter_count > kEnsembleNMax) return {std::nan(""), std::nan("")};
        auto ec = ensemble_config(c, p, c.samples.value_or(auto_samples(p.emitter_count)));
        ec.donor_mode = pinned ? DonorMode::Pinned : DonorMode::Sampled;
        const RateResult r = run_relaxation_ensemble(ec, e1);
        add_warnings(t, r);
        return {r.value, r.std_error};
    };
    if (c.ensemble) {
        t.metadata.emplace_back("fit_offset", fit_note(c));
        t.metadata.emplace_back("samples", c.samples ? std::to_string(*c.samples) : "auto (10^6/N)");
        if (!vs_sigma) t.metadata.emplace_back("note", "ensemble columns are NaN for N > 10^6");
    }
    if (resolved) {
        for (double e1 : donors) {
            t.columns.push_back("gamma[E1=" + short_num(e1) + "]");
            if (c.ensemble) {
                t.columns.push_back("gamma_ens[E1=" + short_num(e1) + "]");
                t.columns.push_back("gamma_ens_stderr[E1=" + short_num(e1) + "]");
            }
        }
        for (double x : xs) {
            const SystemParams p = params_at(x, 2000);
            std::vector<Cell> row{x};
            for (double e1 : donors) {
                row.emplace_back(relaxation_rate(e1, p).value);
                if (c.ensemble) {
                    auto cells = ensemble_cell(p, e1, true);
                    row.insert(row.end(), cells.begin(), cells.end());
                }
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    if (vs_sigma) {
        for (std::int64_t n : kEnsembleSizes) {
            t.columns.push_back("gamma_avg[N=" + std::to_string(n) + "]");
            if (c.ensemble) {
                t.columns.push_back("gamma_avg_ens[N=" + std::to_string(n) + "]");
                t.columns.push_back("gamma_avg_ens_stderr[N=" + std::to_string(n) + "]");
            }
        }
        for (double x : xs) {
            std::vector<Cell> row{x};
            for (std::int64_t n : kEnsembleSizes) {
                const SystemParams p = params_at(x, n);
                row.emplace_back(avg_relaxation_rate(p).value);
                if (c.ensemble) {
                    auto cells = ensemble_cell(p, p.emitter_center, false);
                    row.insert(row.end(), cells.begin(), cells.end());
                }
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    t.columns.emplace_back("gamma_avg");
    if (c.ensemble) t.columns.insert(t.columns.end(), {"gamma_avg_ens", "gamma_avg_ens_stderr"});
    for (double x : xs) {
        const SystemParams p = params_at(x, 2000);
        std::vector<Cell> row{x, avg_relaxation_rate(p).value};
        if (c.ensemble) {
            auto cells = ensemble_cell(p, p.emitter_center, false);
            row.insert(row.end(), cells.begin(), cells.end());
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------- output

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string versions()
{
    std::ostringstream os;
    os << "polariton-lab " << kVersion << ", Eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
       << EIGEN_MINOR_VERSION << ", Boost " << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << ", "
#if defined(__clang__)
       << "clang "
#elif defined(__GNUC__)
       << "gcc "
#endif
       << __VERSION__;
    return os.str();
}

void check_writable(const std::string& path)
{
    if (path.empty() || path == "-") return;
    namespace fs = std::filesystem;
    fs::path dir = fs::path(path).parent_path();
    if (dir.empty()) dir = ".";
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw ConfigError("output directory does not exist: " + dir.string());
    if (::access(dir.c_str(), W_OK) != 0) throw ConfigError("output directory is not writable: " + dir.string());
}

struct FlagSpec {
    const char* flag;
    const char* pointer;  // JSON pointer into the config document
    enum Type { Double, Int, String } type;
    const char* help;
};

const std::vector<FlagSpec> kFlags = {
    {"--EC", "/E_C", FlagSpec::Double, "cavity energy E_C (eV)"},
    {"--EM", "/E_M", FlagSpec::Double, "emitter center energy E_M (eV)"},
    {"--g", "/g", FlagSpec::Double, "single-emitter coupling g (eV)"},
    {"--N", "/N", FlagSpec::Int, "emitter count N"},
    {"--sigma", "/sigma", FlagSpec::Double, "Lorentzian disorder half-width (eV)"},
    {"--E1", "/E1", FlagSpec::Double, "donor energy E1 (eV)"},
    {"--EN", "/reservoir/E_N", FlagSpec::Double, "acceptor energy (eV)"},
    {"--ER", "/reservoir/E_R", FlagSpec::Double, "reservoir center (eV)"},
    {"--Sigma", "/reservoir/Sigma", FlagSpec::Double, "reservoir width (eV)"},
    {"--gR", "/reservoir/g_R", FlagSpec::Double, "acceptor-reservoir coupling (eV)"},
    {"--NR", "/reservoir/N_R", FlagSpec::Int, "reservoir mode count"},
    {"--nu0", "/reservoir/nu0", FlagSpec::Double, "constant acceptor LDOS for Gamma_r (1/eV)"},
    {"--D", "/probe/D", FlagSpec::Double, "transition dipole for matter absorption"},
    {"--grid", "/grid", FlagSpec::String, "energy grid a:b:N or a:b:Nlog"},
    {"--MS", "/samples", FlagSpec::String, "disorder samples, or 'auto' for 10^6/N"},
    {"--fit-offset", "/fit_offset", FlagSpec::Double, "fit offset delta (eV); default auto"},
    {"--donor", "/donor", FlagSpec::String, "pinned or sampled donor energy"},
    {"--tail-cutoff", "/tail_cutoff", FlagSpec::Double, "reject samples beyond cutoff*sigma (0: none)"},
    {"--panel", "/panel", FlagSpec::String, "figure panel letter"},
    {"--seed", "/seed", FlagSpec::Int, "base seed"},
    {"--threads", "/threads", FlagSpec::Int, "worker cap (default POLARITON_LAB_THREADS or all cores)"},
    {"--output,-o", "/output/path", FlagSpec::String, "output file, '-' for stdout"},
    {"--format", "/output/format", FlagSpec::String, "csv or json"},
};

}  // namespace

// ---------------------------------------------------------------- public

std::string to_string(Mode m)
{
    for (const auto& [name, mode] : kModes)
        if (mode == m) return name;
    return "?";
}

std::string to_string(SweepAxis a)
{
    for (const auto& [name, axis] : kAxes)
        if (axis == a) return name;
    return "?";
}

std::vector<double> GridSpec::values() const
{
    std::vector<double> v(static_cast<std::size_t>(points));
    for (std::int64_t i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(points - 1);
        v[static_cast<std::size_t>(i)] = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                                             : lo + f * (hi - lo);
    }
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::string GridSpec::str() const
{
    return exact(lo) + ":" + exact(hi) + ":" + std::to_string(points) + (log ? "log" : "");
}

GridSpec parse_grid(const std::string& s)
{
    const auto a = s.find(':');
    const auto b = a == std::string::npos ? a : s.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("grid '" + s + "' is not of the form a:b:N or a:b:Nlog");
    GridSpec g;
    g.lo = parse_double(s.substr(0, a), "grid start");
    g.hi = parse_double(s.substr(a + 1, b - a - 1), "grid end");
    std::string count = s.substr(b + 1);
    if (count.size() > 3 && count.compare(count.size() - 3, 3, "log") == 0) {
        g.log = true;
        count.resize(count.size() - 3);
    }
    g.points = parse_int(count, "grid point count");
    if (g.points < 2) throw ConfigError("grid '" + s + "' needs at least 2 points");
    if (!(g.hi > g.lo)) throw ConfigError("grid '" + s + "' must be increasing");
    if (g.log && !(g.lo > 0.0)) throw ConfigError("log grid '" + s + "' must start above 0");
    return g;
}

std::int64_t RunConfig::effective_samples() const
{
    return samples.value_or(auto_samples(params.emitter_count));
}

std::string config_to_json(const RunConfig& cfg)
{
    return to_json(cfg).dump();
}

RunConfig config_from_json(const std::string& body, const std::string& source)
{
    return from_json(parse_document(body, source));
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), path);
}

Table compute(const RunConfig& cfg)
{
    validate_run(cfg);
    Table t;
    switch (cfg.mode) {
    case Mode::Eigs: t = eigs_table(cfg); break;
    case Mode::Spectra: t = spectra_table(cfg); break;
    case Mode::Relax: t = relax_table(cfg); break;
    case Mode::Transport: t = transport_table(cfg); break;
    case Mode::Ensemble: t = histogram_table(cfg); break;
    case Mode::Sweep: t = sweep_table(cfg); break;
    case Mode::ReproduceFig: t = figure_table(cfg); break;
    }
    for (const auto& w : validate(cfg.params).warnings) t.metadata.emplace_back("warning", w);
    return t;
}

void write_csv(std::ostream& out, const Table& t, const RunConfig& cfg, bool with_timestamp)
{
    out << "# polariton-lab " << kVersion << "\n";
    out << "# versions: " << versions() << "\n";
    if (with_timestamp) out << "# generated: " << timestamp() << "\n";
    out << "# config: " << config_to_json(cfg) << "\n";
    for (const auto& [k, v] : t.metadata) out << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) out << fmt(v);
                    else out << v;
                },
                row[i]);
        }
        out << "\n";
    }
}

void write_json(std::ostream& out, const Table& t, const RunConfig& cfg, bool with_timestamp)
{
    json meta;
    meta["tool"] = std::string("polariton-lab ") + kVersion;
    meta["versions"] = versions();
    if (with_timestamp) meta["generated"] = timestamp();
    meta["config"] = to_json(cfg);
    for (const auto& [k, v] : t.metadata) {
        if (meta.contains(k) && meta[k].is_array()) meta[k].push_back(v);
        else if (meta.contains(k)) meta[k] = json::array({meta[k], v});
        else meta[k] = v;
    }
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (const auto& cell : row) std::visit([&](const auto& v) { r.push_back(v); }, cell);
        rows.push_back(std::move(r));
    }
    const json doc = {{"metadata", meta}, {"columns", t.columns}, {"rows", rows}};
    out << doc.dump(1) << "\n";
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Disordered emitters coupled to one cavity mode: spectra, relaxation and transport rates"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("polariton-lab ") + kVersion);

    std::string config_path;
    std::vector<std::string> flag_values(kFlags.size());
    std::vector<std::string> sweep;
    bool ensemble_flag = false;
    int figure = 0;

    std::map<std::string, CLI::App*> subs;
    std::vector<std::pair<CLI::App*, std::vector<CLI::Option*>>> options;
    for (const auto& [name, mode] : kModes) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " computation");
        subs[name] = sub;
        std::vector<CLI::Option*> opts;
        for (std::size_t i = 0; i < kFlags.size(); ++i)
            opts.push_back(sub->add_option(kFlags[i].flag, flag_values[i], kFlags[i].help));
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        if (mode != Mode::Spectra && mode != Mode::Ensemble && mode != Mode::ReproduceFig)
            sub->add_option("--sweep", sweep, "sweep AXIS GRID, e.g. sigma 0.001:0.2:200log")->expected(2);
        sub->add_flag("--ensemble", ensemble_flag, "add finite-size ensemble results");
        if (mode == Mode::ReproduceFig) sub->add_option("figure", figure, "figure number (2-6)")->required();
        options.emplace_back(sub, std::move(opts));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = nullptr;
    std::vector<CLI::Option*>* active_opts = nullptr;
    for (auto& [sub, opts] : options)
        if (sub->parsed()) {
            active = sub;
            active_opts = &opts;
        }

    RunConfig cfg;
    try {
        json doc = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            doc = parse_document(ss.str(), config_path);
            from_json(doc);  // reject unknown keys before merging
        }
        const json file_doc = doc;

        // Flags overlay the file document; conflicts are reported.
        const auto overlay = [&](const std::string& pointer, const json& value, const std::string& flag) {
            const json::json_pointer ptr(pointer);
            if (file_doc.contains(ptr) && file_doc.at(ptr) != value)
                err << "config: " << flag << " overrides file value " << file_doc.at(ptr).dump() << " with "
                    << value.dump() << "\n";
            doc[ptr] = value;
        };
        doc["mode"] = active->get_name();
        for (std::size_t i = 0; i < kFlags.size(); ++i) {
            if ((*active_opts)[i]->count() == 0) continue;
            const auto& spec = kFlags[i];
            const std::string& raw = flag_values[i];
            json value;
            switch (spec.type) {
            case FlagSpec::Double: value = parse_double(raw, spec.flag); break;
            case FlagSpec::Int: value = parse_int(raw, spec.flag); break;
            case FlagSpec::String:
                if (std::string(spec.pointer) == "/samples" && raw != "auto") value = parse_int(raw, "--MS");
                else if (std::string(spec.pointer) == "/fit_offset" && raw == "auto") value = "auto";
                else value = raw;
                break;
            }
            overlay(spec.pointer, value, std::string(spec.flag).substr(0, std::string(spec.flag).find(',')));
        }
        if (!sweep.empty()) {
            overlay("/sweep/axis", sweep[0], "--sweep");
            overlay("/sweep/grid", sweep[1], "--sweep");
        }
        if (ensemble_flag) overlay("/ensemble", true, "--ensemble");
        if (active->get_name() == "reproduce-fig") {
            overlay("/figure", figure, "figure");
            if (!doc.contains("panel")) throw ConfigError("reproduce-fig needs --panel");
        }
        cfg = from_json(doc);
        validate_run(cfg);
        check_writable(cfg.output);
    } catch (const InvalidParameter& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return 2;
    }

    Table table;
    try {
        table = compute(cfg);
    } catch (const NumericError& e) {
        err << "numeric failure in " << e.what() << "\n";
        return 3;
    } catch (const InvalidParameter& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return 2;
    }

    for (const auto& [k, v] : table.metadata)
        if (k == "warning") err << "warning: " << v << "\n";

    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output.empty() && cfg.output != "-") {
        file.open(cfg.output);
        if (!file) {
            err << "cannot open output file " << cfg.output << "\n";
            return 2;
        }
        sink = &file;
    }
    if (cfg.format == Format::Csv) write_csv(*sink, table, cfg);
    else write_json(*sink, table, cfg);
    return 0;
}

}  // namespace polariton::cli
