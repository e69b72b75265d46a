#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "gfmlab/model.hpp"

namespace gfmlab {

/// Controller references. q_ref feeds the droop, v_ref the voltage PI.
struct References {
    double p_ref = 0.0;
    double q_ref = 0.0;
    double v_ref = 1.0;

    bool operator==(const References&) const = default;
};

/// Equilibrium of a ConverterModel. Phasors are in the converter frame.
struct OperatingPoint {
    double theta0 = 0.0;
    double e0 = 1.0;
    ComplexDq v0;
    ComplexDq i0_f;
    ComplexDq i0_g;
    double p0 = 0.0;
    double q0 = 0.0;
    Eigen::VectorXd x0;
    Eigen::VectorXd u0;
};

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 50;
    int restarts = 3;
    std::uint32_t seed = 20240611u;
};

/// Nominal input vector of a model for the given references
/// (OuterOpen: theta and E taken from the arguments; Frozen: e = E at angle theta).
Eigen::VectorXd nominal_inputs(const ConverterModel& model, const References& refs, double theta = 0.0,
                               double e_mag = 1.0);

/// Newton solve of f(x, u) = 0 from the supplied guess, then from randomized restarts.
/// Throws NoEquilibrium.
OperatingPoint solve_equilibrium(const ConverterModel& model, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& x_guess, const NewtonOptions& opts = {});

/// Physically informed starting state for the model and its inputs.
Eigen::VectorXd initial_guess(const ConverterModel& model, const Eigen::VectorXd& u, const References& refs);

/// Equilibrium of the model at its nominal inputs.
OperatingPoint solve_operating_point(const ConverterModel& model, const References& refs,
                                     const NewtonOptions& opts = {});

/// Convenience form: v_or_q_ref is the voltage reference when AVC is active,
/// otherwise the reactive-power reference.
OperatingPoint solve_operating_point(const SystemParams& sys, const ControlScheme& scheme, double p_ref,
                                     double v_or_q_ref);

/// Fills the phasor fields of an operating point from its state and inputs.
OperatingPoint describe_point(const ConverterModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

}  // namespace gfmlab
