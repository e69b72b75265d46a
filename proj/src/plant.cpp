#include "gfmlab/plant.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gfmlab/errors.hpp"

namespace gfmlab {

namespace {

constexpr ComplexDq kJ{0.0, 1.0};

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterDomainError(what);
}

}  // namespace

PerUnitBase::PerUnitBase(double v_base, double s_base, double omega_base)
    : v_base_(v_base), s_base_(s_base), omega_base_(omega_base), z_base_(v_base * v_base / s_base) {
    require(v_base > 0.0 && s_base > 0.0 && omega_base > 0.0,
            "per-unit base quantities must be strictly positive");
}

double GridParams::scr() const { return 1.0 / std::hypot(r_g, x_g); }

void GridParams::validate() const {
    require(std::isfinite(r_g) && r_g >= 0.0, "grid resistance must be >= 0");
    require(std::isfinite(x_g) && x_g > 0.0, "grid reactance must be > 0");
    require(std::isfinite(v_g) && v_g > 0.0, "grid voltage must be > 0");
    require(std::isfinite(omega_1) && omega_1 > 0.0, "nominal frequency must be > 0");
}

void ConverterParams::validate() const {
    require(std::isfinite(l_f) && l_f > 0.0, "filter reactance must be > 0");
    require(std::isfinite(c_f) && c_f >= 0.0, "filter susceptance must be >= 0");
    require(std::isfinite(r_f) && r_f >= 0.0, "filter resistance must be >= 0");
    require(kappa == 1.0 || kappa == 1.5, "kappa must be 1 or 1.5");
}

GridParams make_grid_from_scr(double scr, double x_over_r, double v_g, double omega_1) {
    require(scr > 0.0 && std::isfinite(scr), "scr must be positive and finite");
    require(x_over_r > 0.0, "x/r ratio must be positive");
    GridParams g;
    const double z = 1.0 / scr;
    if (std::isinf(x_over_r)) {
        g.r_g = 0.0;
        g.x_g = z;
    } else {
        const double angle = std::atan(x_over_r);
        g.r_g = z * std::cos(angle);
        g.x_g = z * std::sin(angle);
    }
    g.v_g = v_g;
    g.omega_1 = omega_1;
    g.validate();
    return g;
}

SystemParams default_system(double scr, double x_over_r) {
    SystemParams sys;
    sys.grid = make_grid_from_scr(scr, x_over_r, 1.0, sys.base.omega_base());
    return sys;
}

CircuitState circuit_derivatives(const CircuitState& s, ComplexDq e, const GridParams& grid,
                                 const ConverterParams& conv) {
    const double w1 = grid.omega_1;
    const ComplexDq vg{grid.v_g, 0.0};
    if (conv.c_f == 0.0) {
        const double x = conv.l_f + grid.x_g;
        const double r = conv.r_f + grid.r_g;
        const ComplexDq di = (e - vg - r * s.i_f - kJ * x * s.i_f) * (w1 / x);
        return {di, ComplexDq{}, di};
    }
    CircuitState d;
    d.i_f = (e - s.v - conv.r_f * s.i_f - kJ * conv.l_f * s.i_f) * (w1 / conv.l_f);
    d.v = (s.i_f - s.i_g - kJ * conv.c_f * s.v) * (w1 / conv.c_f);
    d.i_g = (s.v - vg - grid.r_g * s.i_g - kJ * grid.x_g * s.i_g) * (w1 / grid.x_g);
    return d;
}

ComplexDq series_poc_voltage(ComplexDq i, ComplexDq di_dt, const GridParams& grid) {
    return ComplexDq{grid.v_g, 0.0} + (grid.r_g + kJ * grid.x_g) * i + (grid.x_g / grid.omega_1) * di_dt;
}

CircuitState circuit_steady_state(ComplexDq e, const GridParams& grid, const ConverterParams& conv) {
    const ComplexDq vg{grid.v_g, 0.0};
    const ComplexDq zf = conv.r_f + kJ * conv.l_f;
    const ComplexDq zg = grid.r_g + kJ * grid.x_g;
    if (conv.c_f == 0.0) {
        const ComplexDq i = (e - vg) / (zf + zg);
        return {i, vg + zg * i, i};
    }
    const ComplexDq yc = kJ * conv.c_f;
    const ComplexDq ig = (e - vg - zf * yc * vg) / (zg + zf + zf * yc * zg);
    const ComplexDq v = vg + zg * ig;
    return {ig + yc * v, v, ig};
}

PowerPair instantaneous_power(ComplexDq v, ComplexDq i, double kappa) {
    return {kappa * (v.real() * i.real() + v.imag() * i.imag()),
            kappa * (v.imag() * i.real() - v.real() * i.imag())};
}

std::array<double, 3> dq_to_abc(ComplexDq x, double theta) {
    constexpr double shift = 2.0 * std::numbers::pi / 3.0;
    auto phase = [&](double angle) { return x.real() * std::cos(angle) - x.imag() * std::sin(angle); };
    return {phase(theta), phase(theta - shift), phase(theta + shift)};
}

ComplexDq abc_to_dq(const std::array<double, 3>& abc, double theta) {
    constexpr double shift = 2.0 * std::numbers::pi / 3.0;
    const double angles[3] = {theta, theta - shift, theta + shift};
    double d = 0.0;
    double q = 0.0;
    for (int k = 0; k < 3; ++k) {
        d += abc[k] * std::cos(angles[k]);
        q -= abc[k] * std::sin(angles[k]);
    }
    return {2.0 * d / 3.0, 2.0 * q / 3.0};
}

}  // namespace gfmlab
