#include "polariton/effham.hpp"

#include "approx.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace polariton;
using cplx = std::complex<double>;

namespace {

// Eigenvalues of the 2x2 block by a general complex eigensolver, sorted by
// real part then imaginary part.
std::pair<cplx, cplx> solver_pair(const SystemParams& p)
{
    Eigen::Matrix2cd h;
    const double gn = p.coupling * std::sqrt(double(p.emitter_count));
    h << p.cavity_energy, gn, gn, cplx(p.emitter_center, -p.disorder_width);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(h);
    cplx a = es.eigenvalues()(0), b = es.eigenvalues()(1);
    const auto less = [](cplx x, cplx y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); };
    if (less(b, a)) std::swap(a, b);
    return {a, b};
}

}  // namespace

TEST_CASE("effective Hamiltonian blocks")
{
    SystemParams p{1.0, 1.0, 0.001, 2000, 0.04};
    const auto h = effective_hamiltonian(p);
    CHECK(h.bright_block(0, 1).real() == approx(0.0447214).epsilon(1e-6));
    CHECK(h.bright_block(0, 1) == h.bright_block(1, 0));
    CHECK(h.dark_block == cplx(1.0, -0.04));
    CHECK(h.bright_block(1, 1) == cplx(1.0, -0.04));
    CHECK(h.bright_block(0, 0) == cplx(1.0, 0.0));

    p.disorder_width = 0.0;
    const auto herm = effective_hamiltonian(p).bright_block;
    CHECK((herm - herm.adjoint()).norm() == 0.0);
}

TEST_CASE("worked eigenenergies")
{
    SystemParams p{1.0, 1.0, 0.001, 2000, 0.04};
    auto e = eigenenergies(p);
    CHECK(std::abs(e.eps1 - cplx(0.96, -0.02)) < 1e-12);
    CHECK(std::abs(e.eps2 - cplx(1.04, -0.02)) < 1e-12);
    CHECK(e.rabi_splitting == approx(0.08).epsilon(1e-12));
    CHECK(e.regime == Regime::Underdamped);

    p.disorder_width = 0.15;
    e = eigenenergies(p);
    CHECK(e.eps1.real() == approx(1.0).epsilon(1e-12));
    CHECK(e.eps1.imag() == approx(-0.135208).epsilon(1e-6));
    CHECK(e.eps2.imag() == approx(-0.014792).epsilon(1e-5));
    CHECK(e.regime == Regime::Overdamped);

    p.disorder_width = 0.0;
    e = eigenenergies(p);
    const double gn = std::sqrt(0.002);
    CHECK(std::abs(e.eps1 - cplx(1.0 - gn, 0.0)) < 1e-14);
    CHECK(std::abs(e.eps2 - cplx(1.0 + gn, 0.0)) < 1e-14);
}

TEST_CASE("closed form agrees with a general eigensolver")
{
    for (double ec : {1.0, 1.05, 0.9}) {
        for (double em : {1.0, 0.95}) {
            for (double sigma : {1e-3, 0.04, 0.0894, 0.15, 2.0}) {
                SystemParams p{ec, em, 0.001, 2000, sigma};
                const auto e = eigenenergies(p);
                const auto [a, b] = solver_pair(p);
                CHECK(std::abs(e.eps1 - a) < 1e-12);
                CHECK(std::abs(e.eps2 - b) < 1e-12);
            }
        }
    }
}

TEST_CASE("regime classification")
{
    SystemParams p{1.0, 1.0, 0.001, 2000, 0.04};
    CHECK(classify_regime(p) == Regime::Underdamped);
    p.disorder_width = 0.0894427191;
    CHECK(classify_regime(p) == Regime::ExceptionalPoint);
    p.disorder_width = 0.2;
    CHECK(classify_regime(p) == Regime::Overdamped);
    for (double s : {0.001, 0.0894427191, 0.5}) {
        SystemParams d{1.05, 0.95, 0.001, 2000, s};
        CHECK(classify_regime(d) == Regime::OffResonant);
    }
    CHECK(to_string(Regime::ExceptionalPoint) == "exceptional_point");
}

TEST_CASE("exceptional point width")
{
    SystemParams p{1.0, 1.0, 0.001, 2000, 0.04};
    CHECK(exceptional_point_width(p) == approx(0.0894427191).epsilon(1e-10));
}

TEST_CASE("asymptotic branches")
{
    SystemParams p{1.0, 1.0, 0.001, 2000, 0.0};
    const double omega = p.rabi_frequency();

    p.disorder_width = 0.01 * omega;
    auto a = asymptotic_eigenenergies(p);
    auto e = eigenenergies(p);
    CHECK(a.eps1.imag() == approx(-p.disorder_width / 2));
    CHECK(a.eps2.imag() == approx(-p.disorder_width / 2));
    CHECK(std::abs(a.eps1 - e.eps1) < 1e-4 * omega);
    CHECK(std::abs(a.eps2 - e.eps2) < 1e-4 * omega);

    p.disorder_width = 100.0 * omega;
    a = asymptotic_eigenenergies(p);
    e = eigenenergies(p);
    CHECK(std::abs(a.eps2 - cplx(1.0, -omega * omega / (4.0 * p.disorder_width))) < 1e-15);
    CHECK(std::abs(a.eps2 - e.eps2) < 1e-4 * std::abs(e.eps2.imag()) + 1e-12);
    CHECK(std::abs(a.eps1 - e.eps1) < 1e-3 * omega);

    p.disorder_width = omega;
    CHECK_THROWS_AS(asymptotic_eigenenergies(p), InvalidParameter);
    SystemParams d{1.05, 0.95, 0.001, 2000, 0.01};
    CHECK_THROWS_AS(asymptotic_eigenenergies(d), InvalidParameter);
}
