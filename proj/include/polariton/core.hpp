#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace polariton {

// Bad input: maps to exit status 2 in the CLI.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that could not be completed: exit status 3.
class NumericError : public std::runtime_error {
public:
    NumericError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

// Cavity mode plus N emitters with Lorentzian energy disorder. Energies in eV.
struct SystemParams {
    double cavity_energy = 1.0;
    double emitter_center = 1.0;
    double coupling = 0.001;
    std::int64_t emitter_count = 2000;
    double disorder_width = 0.04;

    double collective_coupling() const;  // g sqrt(N)
    double rabi_frequency() const;       // 2 g sqrt(N)
};

// Acceptor emitter dressed by a Lorentz-disordered reservoir.
struct ReservoirParams {
    double acceptor_energy = 1.0;
    double reservoir_center = 1.0;
    double reservoir_width = 1.0;
    double reservoir_coupling = 0.03;
    std::int64_t reservoir_mode_count = 1;
    double acceptor_ldos_const = 1.0;  // only used by the resonant transport rate
};

struct ProbeParams {
    double dipole = 1.0;
};

struct DisorderSample {
    std::vector<double> energies;  // index 0 is the donor
    std::uint64_t seed = 0;
    std::uint64_t params_hash = 0;
    double tail_cutoff = 0.0;  // 0 means untruncated
};

struct Validation {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// Counter-based splittable generator. Streams for different (seed, index)
// pairs are independent of evaluation order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    // Uniform on the open interval (0, 1).
    double uniform();

    static std::uint64_t mix(std::uint64_t z);
    static std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index);

private:
    std::uint64_t state_;
};

double lorentz_pdf(double energy, double center, double width);
double lorentz_cdf(double energy, double center, double width);
double lorentz_quantile(double u, double center, double width);

std::uint64_t params_hash(const SystemParams& params);

struct SamplingOptions {
    double tail_cutoff = 0.0;  // reject |E - E_M| > cutoff * sigma when > 0
};

DisorderSample sample_disorder(const SystemParams& params, std::uint64_t seed,
                               const SamplingOptions& options = {});

Validation validate(const SystemParams& params);
Validation validate(const ReservoirParams& reservoir);

}  // namespace polariton
