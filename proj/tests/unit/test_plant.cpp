#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "gfmlab/errors.hpp"
#include "gfmlab/plant.hpp"

using namespace gfmlab;

TEST_CASE("per-unit base converts the laboratory filter") {
    const PerUnitBase base(190.5, 3000.0, 314.0);
    const double z = 190.5 * 190.5 / 3000.0;
    CHECK(base.z_base() == doctest::Approx(z));
    CHECK(base.reactance_from_henry(3e-3) == doctest::Approx(314.0 * 3e-3 / z));
    CHECK(base.reactance_from_henry(3e-3) == doctest::Approx(0.078).epsilon(0.005));
    CHECK(base.susceptance_from_farad(10e-6) == doctest::Approx(0.038).epsilon(0.005));
    CHECK(base.pu_from_ohm(z) == doctest::Approx(1.0));
}

TEST_CASE("per-unit base rejects non-positive quantities") {
    CHECK_THROWS_AS(PerUnitBase(0.0, 3000.0, 314.0), ParameterDomainError);
    CHECK_THROWS_AS(PerUnitBase(190.5, -1.0, 314.0), ParameterDomainError);
    CHECK_THROWS_AS(PerUnitBase(190.5, 3000.0, 0.0), ParameterDomainError);
}

TEST_CASE("grid from SCR keeps |Z| and X/R") {
    Gen g(1);
    for (int k = 0; k < 200; ++k) {
        const double scr = g.log_uniform(1.0, 50.0);
        const double xr = g.log_uniform(0.5, 100.0);
        const GridParams grid = make_grid_from_scr(scr, xr, 1.0, 314.0);
        CHECK(grid.scr() == doctest::Approx(scr).epsilon(1e-12));
        CHECK(grid.x_g / grid.r_g == doctest::Approx(xr).epsilon(1e-9));
    }
    const GridParams lossless = make_grid_from_scr(20.0, kInfiniteRatio, 1.0, 314.0);
    CHECK(lossless.r_g == 0.0);
    CHECK(lossless.x_g == doctest::Approx(0.05));
    CHECK_THROWS_AS(make_grid_from_scr(0.0, 10.0, 1.0, 314.0), ParameterDomainError);
    CHECK_THROWS_AS(make_grid_from_scr(5.0, -1.0, 1.0, 314.0), ParameterDomainError);
}

TEST_CASE("circuit steady state has zero derivatives") {
    Gen g(2);
    for (int k = 0; k < 100; ++k) {
        const GridParams grid = make_grid_from_scr(g.log_uniform(1.5, 30.0), g.log_uniform(1.0, 50.0), 1.0, 314.0);
        ConverterParams conv;
        conv.c_f = g.coin() ? 0.038 : g.uniform(0.01, 0.1);
        const ComplexDq e = 1.0 + g.phasor(0.3);
        const CircuitState s = circuit_steady_state(e, grid, conv);
        const CircuitState d = circuit_derivatives(s, e, grid, conv);
        CHECK(std::abs(d.i_f) < 1e-9);
        CHECK(std::abs(d.v) < 1e-9);
        CHECK(std::abs(d.i_g) < 1e-9);
    }
}

TEST_CASE("capacitor-free steady state matches the series impedance") {
    const GridParams grid = make_grid_from_scr(5.0, 10.0, 1.0, 314.0);
    ConverterParams conv;
    conv.c_f = 0.0;
    const ComplexDq e = std::polar(1.05, 0.2);
    const CircuitState s = circuit_steady_state(e, grid, conv);
    const ComplexDq z{conv.r_f + grid.r_g, conv.l_f + grid.x_g};
    const ComplexDq expected = (e - grid.v_g) / z;
    CHECK(std::abs(s.i_f - expected) < 1e-12);
    CHECK(std::abs(s.i_g - expected) < 1e-12);
}

TEST_CASE("dq to abc round trip and amplitude invariance") {
    Gen g(3);
    for (int k = 0; k < 200; ++k) {
        const ComplexDq x = g.phasor(2.0);
        const double theta = g.uniform(-10.0, 10.0);
        const auto abc = dq_to_abc(x, theta);
        CHECK(abc[0] + abc[1] + abc[2] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
        CHECK(std::max({std::abs(abc[0]), std::abs(abc[1]), std::abs(abc[2])}) <= std::abs(x) + 1e-12);
        CHECK(std::abs(abc_to_dq(abc, theta) - x) < 1e-12);
    }
    // phase a of a d-axis vector at angle 0 is its magnitude
    CHECK(dq_to_abc({0.7, 0.0}, 0.0)[0] == doctest::Approx(0.7));
}

TEST_CASE("instantaneous power is frame independent") {
    Gen g(4);
    for (int k = 0; k < 200; ++k) {
        const ComplexDq v = g.phasor(1.5);
        const ComplexDq i = g.phasor(1.5);
        const double theta = g.uniform(-3.0, 3.0);
        const double kappa = g.coin() ? 1.0 : 1.5;
        const PowerPair a = instantaneous_power(v, i, kappa);
        const PowerPair b = instantaneous_power(to_frame(v, theta), to_frame(i, theta), kappa);
        CHECK(a.p == doctest::Approx(b.p).epsilon(1e-12).scale(1.0));
        CHECK(a.q == doctest::Approx(b.q).epsilon(1e-12).scale(1.0));
        // S = kappa v conj(i)
        const ComplexDq s = kappa * v * std::conj(i);
        CHECK(a.p == doctest::Approx(s.real()).scale(1.0));
        CHECK(a.q == doctest::Approx(s.imag()).scale(1.0));
    }
}

TEST_CASE("parameter validation") {
    ConverterParams conv;
    conv.kappa = 2.0;
    CHECK_THROWS_AS(conv.validate(), ParameterDomainError);
    GridParams grid;
    grid.x_g = 0.0;
    CHECK_THROWS_AS(grid.validate(), ParameterDomainError);
}
