#pragma once

#include <array>
#include <complex>
#include <limits>

namespace gfmlab {

/// Complex space vector in a rotating frame: d component in real(), q in imag().
using ComplexDq = std::complex<double>;

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

/// Per-unit base quantities. z_base is derived and cannot drift from v_base/s_base.
class PerUnitBase {
public:
    /// Throws ParameterDomainError unless every argument is strictly positive.
    PerUnitBase(double v_base, double s_base, double omega_base);

    double v_base() const { return v_base_; }
    double s_base() const { return s_base_; }
    double omega_base() const { return omega_base_; }
    double z_base() const { return z_base_; }

    /// SI inductance (H) to p.u. reactance at omega_base.
    double reactance_from_henry(double l) const { return omega_base_ * l / z_base_; }
    /// SI capacitance (F) to p.u. susceptance at omega_base.
    double susceptance_from_farad(double c) const { return omega_base_ * c * z_base_; }
    double pu_from_ohm(double r) const { return r / z_base_; }

    bool operator==(const PerUnitBase&) const = default;

private:
    double v_base_;
    double s_base_;
    double omega_base_;
    double z_base_;
};

/// Thevenin equivalent of the grid seen from the POC. Impedances in p.u. at omega_1.
struct GridParams {
    double r_g = 0.0;
    double x_g = 0.05;
    double v_g = 1.0;
    double omega_1 = 314.0;

    double scr() const;
    void validate() const;

    bool operator==(const GridParams&) const = default;
};

/// LC output filter and power scaling convention.
struct ConverterParams {
    double l_f = 0.078;    ///< filter reactance (p.u.)
    double c_f = 0.038;    ///< filter susceptance (p.u.); 0 removes the capacitor
    double r_f = 0.005;    ///< filter ESR (p.u.)
    double kappa = 1.0;    ///< 1 for p.u. quantities, 1.5 for peak-value scaling

    void validate() const;

    bool operator==(const ConverterParams&) const = default;
};

struct SystemParams {
    PerUnitBase base{190.5, 3000.0, 314.0};
    GridParams grid;
    ConverterParams conv;

    bool operator==(const SystemParams&) const = default;
};

/// Grid with |Z| = 1/scr and X/R = x_over_r (infinity gives a lossless grid).
GridParams make_grid_from_scr(double scr, double x_over_r, double v_g, double omega_1);

/// Laboratory plant: 190.5 V / 3 kW / 314 rad/s base, 3 mH and 10 uF filter.
SystemParams default_system(double scr = 20.0, double x_over_r = 10.0);

/// Electrical states in the grid-synchronous frame.
struct CircuitState {
    ComplexDq i_f;  ///< converter-side inductor current
    ComplexDq v;    ///< POC (capacitor) voltage
    ComplexDq i_g;  ///< grid-side current
};

/// Averaged LC + Thevenin dynamics in a frame rotating at omega_1.
///
/// With conv.c_f == 0 the capacitor is removed: i_f is the single series
/// current, v and i_g inputs are ignored, and the returned derivative carries
/// the same value in i_f and i_g (dv = 0). Use series_poc_voltage for v.
CircuitState circuit_derivatives(const CircuitState& state, ComplexDq e, const GridParams& grid,
                                 const ConverterParams& conv);

/// POC voltage of the capacitor-free circuit, given the current and its derivative.
ComplexDq series_poc_voltage(ComplexDq i, ComplexDq di_dt, const GridParams& grid);

/// Steady-state circuit currents and voltage for a fixed converter voltage e (grid frame).
CircuitState circuit_steady_state(ComplexDq e, const GridParams& grid, const ConverterParams& conv);

struct PowerPair {
    double p = 0.0;
    double q = 0.0;
};

/// P = kappa (vd id + vq iq), Q = kappa (vq id - vd iq).
PowerPair instantaneous_power(ComplexDq v, ComplexDq i, double kappa = 1.0);

/// Phase a/b/c values of a dq vector at frame angle theta (amplitude-invariant).
std::array<double, 3> dq_to_abc(ComplexDq x, double theta);

/// Inverse of dq_to_abc for balanced inputs.
ComplexDq abc_to_dq(const std::array<double, 3>& abc, double theta);

/// Rotate a vector from the grid frame into a frame leading it by theta.
inline ComplexDq to_frame(ComplexDq x, double theta) { return x * std::polar(1.0, -theta); }
inline ComplexDq from_frame(ComplexDq x, double theta) { return x * std::polar(1.0, theta); }

}  // namespace gfmlab
