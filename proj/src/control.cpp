#include "gfmlab/control.hpp"

#include <cmath>
#include <string>

#include "gfmlab/errors.hpp"

namespace gfmlab {

namespace {

constexpr ComplexDq kJ{0.0, 1.0};

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterDomainError(what);
}

void expect_size(std::span<const double> state, std::size_t n, const char* block) {
    if (state.size() != n) {
        throw VariantMismatch(std::string(block) + ": expected " + std::to_string(n) +
                              " states, got " + std::to_string(state.size()));
    }
}

double prf_current(double p_ref, double v_mag, double kappa) {
    if (!(v_mag > 0.05)) throw DegenerateVoltage("power-reference path needs |v| > 0.05 p.u.");
    return p_ref / (kappa * v_mag);
}

}  // namespace

// ---------------------------------------------------------------------------

void PscConfig::validate() const {
    require(k_p > 0.0, "PSC gain k_p must be > 0");
    std::visit(Overloaded{[](const PureDroop&) {},
                          [](const DroopLpf& f) { require(f.omega_c > 0.0, "PSC omega_c must be > 0"); },
                          [](const LeadLag& f) {
                              require(f.omega_c > 0.0, "PSC omega_c must be > 0");
                              require(f.t_lag > 0.0 && f.t_lead >= 0.0, "lead-lag time constants invalid");
                          }},
               filter);
}

std::vector<std::string> psc_state_labels(const PscConfig& cfg) {
    return std::visit(Overloaded{[](const PureDroop&) { return std::vector<std::string>{}; },
                                 [](const DroopLpf&) { return std::vector<std::string>{"psc_lpf"}; },
                                 [](const LeadLag&) {
                                     return std::vector<std::string>{"psc_lpf", "psc_leadlag"};
                                 }},
                      cfg.filter);
}

PscOutput psc_step(const PscConfig& cfg, std::span<const double> x, std::span<double> dx,
                   double p_meas, double p_ref, double v_q_meas, double omega_1) {
    const double err = p_ref - p_meas;
    const double shaped = std::visit(
        Overloaded{[&](const PureDroop&) {
                       expect_size(x, 0, "psc");
                       return err;
                   },
                   [&](const DroopLpf& f) {
                       expect_size(x, 1, "psc");
                       dx[0] = f.omega_c * (err - x[0]);
                       return x[0];
                   },
                   [&](const LeadLag& f) {
                       expect_size(x, 2, "psc");
                       dx[0] = f.omega_c * (err - x[0]);
                       dx[1] = (x[0] - x[1]) / f.t_lag;
                       const double ratio = f.t_lead / f.t_lag;
                       return ratio * x[0] + (1.0 - ratio) * x[1];
                   }},
        cfg.filter);
    double dw = cfg.k_p * shaped;
    if (cfg.k_vq) dw += *cfg.k_vq * v_q_meas;
    return {omega_1 + dw, dw};
}

// ---------------------------------------------------------------------------

void OuterVoltageConfig::validate() const {
    require(k_q >= 0.0, "RPC droop must be >= 0");
    if (avc) require(avc->k_p >= 0.0 && avc->k_i >= 0.0, "AVC gains must be >= 0");
}

std::vector<std::string> outer_state_labels(const OuterVoltageConfig& cfg) {
    if (cfg.avc) return {"avc_int"};
    return {};
}

double outer_voltage_step(const OuterVoltageConfig& cfg, std::span<const double> x, std::span<double> dx,
                          double q_meas, double q_ref, double v_mag, double v_ref) {
    double e = cfg.e_nom + cfg.k_q * (q_ref - q_meas);
    if (cfg.avc) {
        expect_size(x, 1, "outer voltage");
        const double err = v_ref - v_mag;
        dx[0] = cfg.avc->k_i * err;
        e += cfg.avc->k_p * err + x[0];
    } else {
        expect_size(x, 0, "outer voltage");
    }
    return e;
}

// ---------------------------------------------------------------------------

PiGains default_vcc_gains(const SystemParams& sys) {
    const double alpha_c = kTwoPi * 500.0;
    return {alpha_c * sys.conv.l_f / sys.grid.omega_1, alpha_c * sys.conv.r_f};
}

PiGains default_vvc_gains(const SystemParams& /*sys*/) {
    // Proportional-heavy tuning: with a stiff grid the voltage loop closes through
    // the grid impedance, so k_p sets the damping of the integrator-induced mode.
    return {6.0, 500.0};
}

ClosedLoopVvc default_closed_loop(const SystemParams& sys) {
    ClosedLoopVvc c;
    c.vvc = default_vvc_gains(sys);
    c.vcc = default_vcc_gains(sys);
    return c;
}

void ControlScheme::validate() const {
    psc.validate();
    outer.validate();
    require(omega_meas > 0.0, "power measurement bandwidth must be > 0");
    std::visit(Overloaded{[](const OpenLoopVvc& o) {
                              if (o.vr) require(o.vr->r_a >= 0.0 && o.vr->omega_v > 0.0, "VR parameters invalid");
                              if (o.prf) require(o.prf->r_a > 0.0, "PRF gain must be > 0");
                              if (o.prf && !o.vr) require(false, "PRF needs the q-axis virtual resistance");
                              if (o.pdc) require(o.pdc->r_g_hat >= 0.0 && o.pdc->x_g_hat >= 0.0,
                                                 "PDC impedance estimates must be >= 0");
                          },
                          [](const ClosedLoopVvc& c) {
                              require(c.vvc.k_p >= 0.0 && c.vvc.k_i >= 0.0, "VVC gains must be >= 0");
                              require(c.vcc.k_p > 0.0 && c.vcc.k_i >= 0.0, "VCC gains invalid");
                              require(c.v_ff_bandwidth >= 0.0, "voltage feedforward bandwidth must be >= 0");
                              std::visit(Overloaded{[](const NoAddOn&) {},
                                                    [](const ViAddOn& a) {
                                                        require(a.r_v >= 0.0 && a.l_v >= 0.0 && a.omega_lpf > 0.0,
                                                                "VI parameters invalid");
                                                    },
                                                    [](const VaAddOn& a) {
                                                        require(a.r_v >= 0.0 && a.l_v > 0.0, "VA parameters invalid");
                                                    },
                                                    [](const HybridAddOn& a) {
                                                        require(a.k_i_dq >= 0.0, "d-to-q gain must be >= 0");
                                                    },
                                                    [](const ActiveSusceptanceAddOn& a) {
                                                        require(a.k_i_dq >= 0.0, "d-to-q gain must be >= 0");
                                                    },
                                                    [](const GfmVccAddOn& a) {
                                                        require(a.va.r_v >= 0.0 && a.va.l_v > 0.0, "VA parameters invalid");
                                                        require(a.pll.k_p > 0.0 && a.pll.k_i > 0.0, "PLL gains must be > 0");
                                                    }},
                                         c.add_on);
                          }},
               inner);
}

bool ControlScheme::uses_pll() const {
    const auto* c = std::get_if<ClosedLoopVvc>(&inner);
    return c && std::holds_alternative<GfmVccAddOn>(c->add_on);
}

bool ControlScheme::has_pdc() const {
    const auto* o = std::get_if<OpenLoopVvc>(&inner);
    return o && o->pdc.has_value();
}

std::vector<std::string> inner_state_labels(const InnerConfig& cfg) {
    return std::visit(
        Overloaded{[](const OpenLoopVvc& o) {
                       std::vector<std::string> labels;
                       if (o.vr) {
                           if (!o.prf) labels.emplace_back("vr_hpf_d");
                           labels.emplace_back("vr_hpf_q");
                       }
                       return labels;
                   },
                   [](const ClosedLoopVvc& c) {
                       const bool va = std::holds_alternative<VaAddOn>(c.add_on) ||
                                       std::holds_alternative<GfmVccAddOn>(c.add_on);
                       std::vector<std::string> labels;
                       if (va) {
                           labels = {"va_i_d", "va_i_q"};
                       } else {
                           labels = {"vvc_int_d", "vvc_int_q"};
                       }
                       labels.emplace_back("vcc_int_d");
                       labels.emplace_back("vcc_int_q");
                       if (std::holds_alternative<ViAddOn>(c.add_on)) {
                           labels.emplace_back("vi_lpf_d");
                           labels.emplace_back("vi_lpf_q");
                       }
                       if (c.v_ff_bandwidth > 0.0) {
                           labels.emplace_back("vff_d");
                           labels.emplace_back("vff_q");
                       }
                       return labels;
                   }},
        cfg);
}

InnerOutput open_loop_inner_step(const OpenLoopVvc& cfg, std::span<const double> x, std::span<double> dx,
                                 const InnerInputs& in, double kappa) {
    expect_size(x, cfg.vr ? (cfg.prf ? 1 : 2) : 0, "open-loop inner");
    InnerOutput out;
    ComplexDq e{in.e_mag, 0.0};
    if (cfg.vr) {
        const double wv = cfg.vr->omega_v;
        if (cfg.prf) {
            dx[0] = wv * (in.i_f.imag() - x[0]);
            e -= kJ * (cfg.vr->r_a * (in.i_f.imag() - x[0]));
        } else {
            const ComplexDq h{x[0], x[1]};
            const ComplexDq hp = in.i_f - h;
            dx[0] = wv * hp.real();
            dx[1] = wv * hp.imag();
            e -= cfg.vr->r_a * hp;
        }
    }
    if (cfg.prf) {
        e += cfg.prf->r_a * (prf_current(in.p_ref, in.v_mag, kappa) - in.i_f.real());
    }
    out.e_cmd = e;
    return out;
}

InnerOutput closed_loop_inner_step(const ClosedLoopVvc& cfg, std::span<const double> x, std::span<double> dx,
                                   const InnerInputs& in, const SystemParams& sys) {
    const std::size_t vff_off = std::holds_alternative<ViAddOn>(cfg.add_on) ? 6 : 4;
    const bool vff = cfg.v_ff_bandwidth > 0.0;
    expect_size(x, vff_off + (vff ? 2 : 0), "closed-loop inner");
    const double w1 = sys.grid.omega_1;
    const double kappa = sys.conv.kappa;
    InnerOutput out;
    ComplexDq i_ref;

    auto va_current = [&](const VaAddOn& va) {
        const ComplexDq y{x[0], x[1]};
        const ComplexDq e_ref{in.e_mag, 0.0};
        const ComplexDq dy = (e_ref - in.v - (va.r_v + kJ * va.l_v) * y) * (w1 / va.l_v);
        dx[0] = dy.real();
        dx[1] = dy.imag();
        return y;
    };

    if (const auto* va = std::get_if<VaAddOn>(&cfg.add_on)) {
        i_ref = va_current(*va);
    } else if (const auto* gv = std::get_if<GfmVccAddOn>(&cfg.add_on)) {
        i_ref = va_current(gv->va);
        if (gv->prf) i_ref += prf_current(in.p_ref, in.v_mag, kappa);
    } else {
        ComplexDq v_ref{in.e_mag, 0.0};
        if (const auto* vi = std::get_if<ViAddOn>(&cfg.add_on)) {
            const ComplexDq z{x[4], x[5]};
            const ComplexDq dz = vi->omega_lpf * (in.i_g - z);
            dx[4] = dz.real();
            dx[5] = dz.imag();
            v_ref -= (vi->r_v + kJ * vi->l_v) * in.i_g + (vi->l_v / w1) * dz;
        }
        const ComplexDq err = v_ref - in.v;
        i_ref = cfg.vvc.k_p * err + ComplexDq{x[0], x[1]};
        dx[0] = cfg.vvc.k_i * err.real();
        dx[1] = cfg.vvc.k_i * err.imag();
        double k_dq = 0.0;
        bool prf = false;
        if (const auto* h = std::get_if<HybridAddOn>(&cfg.add_on)) {
            k_dq = h->k_i_dq;
            prf = h->prf;
        } else if (const auto* as = std::get_if<ActiveSusceptanceAddOn>(&cfg.add_on)) {
            k_dq = as->k_i_dq;
            prf = as->prf;
            out.as_term = as_feedback(as->b_a, in.v.imag());
            i_ref += out.as_term;
        }
        // d-to-q path shares the q-axis integrator
        if (k_dq != 0.0) dx[1] -= k_dq * err.real();
        if (prf) i_ref += prf_current(in.p_ref, in.v_mag, kappa);
    }
    if (cfg.cap_decoupling) i_ref += kJ * sys.conv.c_f * in.v;
    if (cfg.ig_feedforward) i_ref += in.i_g;
    i_ref += in.i_ref_dist;

    ComplexDq v_ff = in.v;
    if (vff) {
        v_ff = {x[vff_off], x[vff_off + 1]};
        dx[vff_off] = cfg.v_ff_bandwidth * (in.v.real() - v_ff.real());
        dx[vff_off + 1] = cfg.v_ff_bandwidth * (in.v.imag() - v_ff.imag());
    }
    const ComplexDq ierr = i_ref - in.i_f;
    ComplexDq e = cfg.vcc.k_p * ierr + ComplexDq{x[2], x[3]} + v_ff;
    if (cfg.ind_decoupling) e += kJ * sys.conv.l_f * in.i_f;
    dx[2] = cfg.vcc.k_i * ierr.real();
    dx[3] = cfg.vcc.k_i * ierr.imag();

    out.e_cmd = e;
    out.i_ref = i_ref;
    return out;
}

PllOutput pll_step(const PllGains& cfg, std::span<const double> x, std::span<double> dx, double v_q,
                   double omega_1) {
    expect_size(x, 1, "pll");
    dx[0] = cfg.k_i * v_q;
    const double dw = cfg.k_p * v_q + x[0];
    return {omega_1 + dw, dw};
}

}  // namespace gfmlab
