#pragma once

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gfmlab/plant.hpp"

namespace gfmlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Power synchronization control

struct PureDroop {
    bool operator==(const PureDroop&) const = default;
};

/// Droop with a first-order LPF. A virtual synchronous machine maps onto this block.
struct DroopLpf {
    double omega_c = 31.4;

    bool operator==(const DroopLpf&) const = default;
};

/// LPF in series with a lead-lag (1 + s t_lead) / (1 + s t_lag).
struct LeadLag {
    double omega_c = 31.4;
    double t_lead = 0.0;
    double t_lag = 0.0;

    bool operator==(const LeadLag&) const = default;
};

using PscFilter = std::variant<PureDroop, DroopLpf, LeadLag>;

struct PscConfig {
    double k_p = 0.05 * 314.0;       ///< rad/s per p.u. power
    PscFilter filter = PureDroop{};
    std::optional<double> k_vq;      ///< hybrid synchronization: v_q feedforward (rad/s per p.u.)

    void validate() const;

    bool operator==(const PscConfig&) const = default;
};

std::vector<std::string> psc_state_labels(const PscConfig& cfg);

struct PscOutput {
    double omega = 0.0;       ///< converter frequency (rad/s)
    double dtheta_dt = 0.0;   ///< omega - omega_1: angle rate relative to the grid frame
};

/// omega = omega_1 + k_p * F(s) (p_ref - p_meas) [+ k_vq v_q]; writes the filter derivatives.
PscOutput psc_step(const PscConfig& cfg, std::span<const double> state, std::span<double> dstate,
                   double p_meas, double p_ref, double v_q_meas, double omega_1);

// ---------------------------------------------------------------------------
// Outer voltage loops

struct PiGains {
    double k_p = 0.0;
    double k_i = 0.0;

    bool operator==(const PiGains&) const = default;
};

struct OuterVoltageConfig {
    double k_q = 0.02;              ///< RPC droop (p.u. voltage per p.u. reactive power)
    std::optional<PiGains> avc;     ///< alternating voltage control on (v_ref - |v|)
    double e_nom = 1.0;

    void validate() const;

    bool operator==(const OuterVoltageConfig&) const = default;
};

std::vector<std::string> outer_state_labels(const OuterVoltageConfig& cfg);

/// E = e_nom + k_q (q_ref - q_meas) [+ PI(v_ref - |v|)]. Returns E.
double outer_voltage_step(const OuterVoltageConfig& cfg, std::span<const double> state,
                          std::span<double> dstate, double q_meas, double q_ref, double v_mag,
                          double v_ref);

// ---------------------------------------------------------------------------
// Inner loops: open-loop vector voltage control

/// Virtual resistance r_a with a high-pass filter at omega_v on the converter current.
struct VrConfig {
    double r_a = 0.2;
    double omega_v = kTwoPi * 7.5;

    bool operator==(const VrConfig&) const = default;
};

/// d-axis power-reference feedforward: e_d += r_a (p_ref/(kappa V) - i_d).
struct PrfConfig {
    double r_a = 0.2;

    bool operator==(const PrfConfig&) const = default;
};

/// Power decoupling from estimated grid impedance.
struct PdcConfig {
    double r_g_hat = 0.0;
    double x_g_hat = 0.05;
    bool include_filter_and_vr = true;

    bool operator==(const PdcConfig&) const = default;
};

struct OpenLoopVvc {
    std::optional<VrConfig> vr;
    std::optional<PrfConfig> prf;
    std::optional<PdcConfig> pdc;

    bool operator==(const OpenLoopVvc&) const = default;
};

// ---------------------------------------------------------------------------
// Inner loops: closed-loop vector voltage control

struct NoAddOn {
    bool operator==(const NoAddOn&) const = default;
};

/// Current-feedback virtual impedance; derivative branch through an LPF.
struct ViAddOn {
    double r_v = 0.1;
    double l_v = 0.3;
    double omega_lpf = kTwoPi * 75.0;

    bool operator==(const ViAddOn&) const = default;
};

/// Voltage-feedback virtual admittance replacing the VVC PI.
struct VaAddOn {
    double r_v = 0.1;
    double l_v = 0.3;

    bool operator==(const VaAddOn&) const = default;
};

/// Hybrid inner loops: extra d-to-q integral path sharing the q integrator.
struct HybridAddOn {
    double k_i_dq = 50.0;
    bool prf = true;

    bool operator==(const HybridAddOn&) const = default;
};

/// Hybrid inner loops plus the q-to-d active susceptance path.
struct ActiveSusceptanceAddOn {
    double b_a = 1.0;
    double k_i_dq = 50.0;
    bool prf = true;

    bool operator==(const ActiveSusceptanceAddOn&) const = default;
};

struct PllGains {
    double k_p = 2.0 * 0.7 * kTwoPi * 5.0;
    double k_i = (kTwoPi * 5.0) * (kTwoPi * 5.0);

    bool operator==(const PllGains&) const = default;
};

/// Virtual admittance (synchronous-condenser stator) with PLL synchronization
/// and a parallel power-reference current injection.
struct GfmVccAddOn {
    VaAddOn va;
    PllGains pll;
    bool prf = true;

    bool operator==(const GfmVccAddOn&) const = default;
};

using InnerAddOn =
    std::variant<NoAddOn, ViAddOn, VaAddOn, HybridAddOn, ActiveSusceptanceAddOn, GfmVccAddOn>;

struct ClosedLoopVvc {
    PiGains vvc;
    bool cap_decoupling = true;
    bool ig_feedforward = false;
    PiGains vcc;
    bool ind_decoupling = true;
    /// LPF on the VCC voltage feedforward (rad/s, 0 = unfiltered). Keeps the
    /// filter resonance damped when no VVC proportional path is present.
    double v_ff_bandwidth = kTwoPi * 1000.0;
    InnerAddOn add_on = NoAddOn{};

    bool operator==(const ClosedLoopVvc&) const = default;
};

using InnerConfig = std::variant<OpenLoopVvc, ClosedLoopVvc>;

/// Complete control stack of one converter.
struct ControlScheme {
    PscConfig psc;
    OuterVoltageConfig outer;
    InnerConfig inner = OpenLoopVvc{};
    double omega_meas = kTwoPi * 500.0;  ///< P/Q measurement LPF

    void validate() const;
    bool uses_pll() const;
    bool has_pdc() const;

    bool operator==(const ControlScheme&) const = default;
};

/// Default inner-loop gains. VCC bandwidth 500 Hz from the filter; VVC tuned for stiff grids.
PiGains default_vcc_gains(const SystemParams& sys);
PiGains default_vvc_gains(const SystemParams& sys);
ClosedLoopVvc default_closed_loop(const SystemParams& sys);

/// Labels of the inner-loop states for the configured variant.
std::vector<std::string> inner_state_labels(const InnerConfig& cfg);

struct InnerInputs {
    double e_mag = 1.0;      ///< outer-loop voltage magnitude E
    ComplexDq v;             ///< POC voltage, converter frame
    ComplexDq i_f;           ///< converter current, converter frame
    ComplexDq i_g;           ///< output current, converter frame
    double p_ref = 0.0;
    double v_mag = 1.0;      ///< |v| used by the power-reference paths
    ComplexDq i_ref_dist;    ///< additive current-reference disturbance (closed loop only)
};

struct InnerOutput {
    ComplexDq e_cmd;         ///< converter voltage command, converter frame
    ComplexDq i_ref;         ///< current reference (closed loop) or zero
    double as_term = 0.0;    ///< active-susceptance contribution to i_d_ref
};

/// Open-loop VVC: reference generator with virtual resistance and power-reference feedforward.
InnerOutput open_loop_inner_step(const OpenLoopVvc& cfg, std::span<const double> state,
                                 std::span<double> dstate, const InnerInputs& in, double kappa);

/// Cascaded VVC/VCC with the configured add-on.
InnerOutput closed_loop_inner_step(const ClosedLoopVvc& cfg, std::span<const double> state,
                                   std::span<double> dstate, const InnerInputs& in,
                                   const SystemParams& sys);

/// Active susceptance path: delta i_d_ref = -b_a v_q.
inline double as_feedback(double b_a, double v_q) { return -b_a * v_q; }

struct PllOutput {
    double omega = 0.0;
    double dtheta_dt = 0.0;
};

/// Synchronous-frame PLL: omega = omega_1 + k_p v_q + x, dx/dt = k_i v_q.
PllOutput pll_step(const PllGains& cfg, std::span<const double> state, std::span<double> dstate,
                   double v_q, double omega_1);

}  // namespace gfmlab
