#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gfmlab/model.hpp"
#include "gfmlab/operating_point.hpp"

namespace gfmlab {

struct LinearModel {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    Eigen::MatrixXd c;
    Eigen::MatrixXd d;
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    OperatingPoint op;

    int input_index(const std::string& label) const;
    int output_index(const std::string& label) const;
    /// Single input/output channel as a state-space system.
    SisoStateSpace channel(const std::string& input, const std::string& output) const;
};

/// Central-difference linearization around an equilibrium. Empty label lists select everything.
/// Throws NotAnEquilibrium when |f(x0, u0)| >= 1e-8.
LinearModel linearize(const ConverterModel& model, const OperatingPoint& op,
                      const std::vector<std::string>& inputs = {}, const std::vector<std::string>& outputs = {},
                      double rel_step = 1e-6, double abs_step = 1e-9);

/// Removes states (rows/columns) by label, e.g. ones that cannot influence the chosen outputs.
LinearModel drop_states(const LinearModel& model, const std::vector<std::string>& labels);

struct Mode {
    std::complex<double> eigenvalue;
    double freq_hz = 0.0;
    double zeta = 0.0;
    std::vector<std::pair<std::string, double>> participants;  ///< largest first
};

/// All eigenvalues sorted by ascending frequency, conjugates adjacent.
std::vector<Mode> eigenmodes(const LinearModel& model);

/// Least-damped mode with frequency inside [f_lo, f_hi] Hz; nullptr when none.
const Mode* least_damped(const std::vector<Mode>& modes, double f_lo, double f_hi);

/// C (jw I - A)^-1 B + D for one channel. Samples at singular points are infinite.
std::vector<std::complex<double>> freq_response(const LinearModel& model, const std::string& input,
                                                const std::string& output, const std::vector<double>& omega);

/// n logarithmically spaced values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

// ---------------------------------------------------------------------------
// Analytic formulas. Inductances are reactance/omega_1 in the same unit system as r.

/// Series RL plant seen from the rotating frame: -r/l +/- j omega_1.
std::array<std::complex<double>, 2> plant_poles(double r, double l, double omega_1);

struct SecondOrder {
    double zeta = 0.0;
    double omega_n = 0.0;
    double damped_hz() const;
};

/// Droop with LPF on a lossless link of reactance x: zeta = 0.5 sqrt(w_c x/(k_p v_g e)).
SecondOrder psc_second_order(double k_p, double omega_c, double x, double v_g, double e);

/// Synchronous pole pair moved by droop feedback.
std::array<std::complex<double>, 2> droop_pole_estimate(double r, double l, double k_p, double e, double v_d0,
                                                        double kappa, double omega_1);

/// Largest droop gain (p.u., i.e. kappa k_p e v_d0 / omega_1) keeping the synchronous pair damped.
double droop_gain_limit(double r);

/// Droop gain (rad/s per p.u.) matched to a virtual resistance.
double vr_design_kp(double r_a, double v, double kappa, double omega_1);

struct VrPoles {
    std::vector<std::complex<double>> all;
    std::vector<std::complex<double>> synchronous;     ///< |Im| within [0.8, 1.2] omega_1
    std::vector<std::complex<double>> subsynchronous;  ///< |Im| below 0.5 omega_1
};

/// Roots of [s l + r + r_a s/(s + omega_v)]^2 + (omega_1 l)^2.
VrPoles vr_mode_poles(double r, double l, double r_a, double omega_v, double omega_1);

// ---------------------------------------------------------------------------

void write_modes_csv(std::ostream& os, const std::vector<Mode>& modes);
void write_bode_csv(std::ostream& os, const std::vector<double>& omega,
                    const std::vector<std::complex<double>>& response);

}  // namespace gfmlab
