#pragma once

#include "polariton/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace polariton::cli {

enum class Mode { Eigs, Spectra, Relax, Transport, Ensemble, Sweep, ReproduceFig };
enum class SweepAxis { Sigma, N, E1 };
enum class Format { Csv, Json };

std::string to_string(Mode m);
std::string to_string(SweepAxis a);

// "a:b:N" (linear) or "a:b:Nlog" (logarithmic), N >= 2 points.
struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::int64_t points = 2;
    bool log = false;

    std::vector<double> values() const;
    std::string str() const;
};

GridSpec parse_grid(const std::string& text);

// Bad config file or flag combination: exit status 2.
class ConfigError : public InvalidParameter {
public:
    using InvalidParameter::InvalidParameter;
};

struct RunConfig {
    Mode mode = Mode::Eigs;
    SystemParams params;
    std::optional<ReservoirParams> reservoir;
    std::optional<ProbeParams> probe;
    std::optional<SweepAxis> sweep_axis;
    std::optional<GridSpec> sweep_grid;
    std::optional<GridSpec> grid;  // spectra energy grid or histogram edges
    double donor_energy = 1.0;
    bool ensemble = false;
    std::optional<std::int64_t> samples;  // unset: 10^6 / N
    std::optional<double> fit_offset;     // unset: bias-corrected default
    bool sampled_donor = false;
    double tail_cutoff = 0.0;
    int figure = 0;
    std::string panel;
    std::string output = "-";
    Format format = Format::Csv;
    std::uint64_t seed = 1;
    int threads = 0;

    std::int64_t effective_samples() const;
};

// Config documents are JSON (comments allowed). Unknown keys are errors.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;
};

Table compute(const RunConfig& cfg);

void write_csv(std::ostream& out, const Table& table, const RunConfig& cfg, bool with_timestamp = true);
void write_json(std::ostream& out, const Table& table, const RunConfig& cfg, bool with_timestamp = true);

// Full front end; returns the process exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace polariton::cli
