#pragma once

#include <complex>
#include <optional>

#include "gfmlab/control.hpp"
#include "gfmlab/linear.hpp"
#include "gfmlab/model.hpp"
#include "gfmlab/operating_point.hpp"
#include "gfmlab/smallsignal.hpp"

namespace gfmlab {

/// Power decoupling controllers designed on a reduced plant with the
/// estimated grid. Transfer functions use the normalized variable s/omega_scale.
struct PdcDesign {
    TransferFunction c_v_theta;  ///< -G_VP / G_thetaP: E deviation -> angle injection
    TransferFunction c_theta_v;  ///< -G_thetaQ / G_VQ: angle deviation -> E injection
    TransferFunction f_theta_p;  ///< shaped P/theta diagonal
    TransferFunction f_v_q;      ///< shaped Q/E diagonal
    double omega_scale = 314.0;
    bool non_proper = false;     ///< a quotient needed the high-frequency roll-off
    bool refitted = false;       ///< unstable quotient poles were mirrored and the numerator refitted
    PdcInjection injection;

    std::complex<double> eval(const TransferFunction& tf, double omega) const {
        return tf(std::complex<double>(0.0, omega / omega_scale));
    }
};

/// Reduced plant of the design: series filter + estimated grid, with theta and E as inputs.
LinearModel pdc_design_plant(const PdcConfig& cfg, const SystemParams& sys, const ControlScheme& scheme,
                             const OperatingPoint& op);

PdcDesign pdc_controllers(const PdcConfig& cfg, const SystemParams& sys, const ControlScheme& scheme,
                          const OperatingPoint& op);

/// Model ready for simulation or linearization together with its equilibrium.
struct PreparedModel {
    ConverterModel model;
    OperatingPoint op;
    std::optional<PdcDesign> pdc;
};

/// Solves the closed-loop equilibrium, designs PDC when configured, and
/// returns the model in the requested loop mode at that equilibrium.
PreparedModel prepare_model(const SystemParams& sys, const ControlScheme& scheme, const References& refs,
                            LoopMode mode = LoopMode::Closed);

}  // namespace gfmlab
