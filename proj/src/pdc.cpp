#include "gfmlab/pdc.hpp"

#include <cmath>

#include "gfmlab/errors.hpp"

namespace gfmlab {

namespace {

Polynomial negated(Polynomial p) {
    for (double& c : p.coeffs) c = -c;
    return p;
}

Polynomial sum(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    out.coeffs.assign(std::max(a.coeffs.size(), b.coeffs.size()), 0.0);
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) out.coeffs[k] += a.coeffs[k];
    for (std::size_t k = 0; k < b.coeffs.size(); ++k) out.coeffs[k] += b.coeffs[k];
    return out;
}

// roll-off corner in units of omega_1
constexpr double kRollOff = 10.0;

/// Appends first-order poles at the roll-off corner until the quotient is proper.
TransferFunction roll_off(TransferFunction tf, bool& non_proper) {
    const int excess = tf.num.degree() - tf.den.degree();
    for (int k = 0; k < excess; ++k) tf.den = tf.den * Polynomial{{1.0, 1.0 / kRollOff}};
    if (excess > 0) non_proper = true;
    return tf;
}

TransferFunction quotient(const Polynomial& num, const Polynomial& den, bool& non_proper) {
    if (num.degree() < 0) return {Polynomial{{0.0}}, Polynomial{{1.0}}};
    if (den.degree() < 0) throw NumericFailure("power decoupling: diagonal plant entry is identically zero");
    return roll_off(cancel_common_roots({trimmed(num), trimmed(den)}), non_proper);
}

/// Stable, moderately fast replacement for a quotient: right-half-plane poles are
/// mirrored, poles beyond the roll-off corner are moved onto it, and the numerator
/// is refitted to the exact response over [w_lo, w_hi] (normalized frequency).
TransferFunction stabilized(const TransferFunction& exact, double w_lo, double w_hi, bool& changed) {
    std::vector<std::complex<double>> poles = exact.den.roots();
    bool moved = false;
    for (auto& p : poles) {
        if (p.real() > 0.0) {
            p = {-p.real(), p.imag()};
            moved = true;
        }
        if (std::abs(p) > kRollOff) {
            p = {-kRollOff, 0.0};
            moved = true;
        }
    }
    if (!moved) return exact;
    changed = true;
    const int n = exact.den.degree();
    const Polynomial den = Polynomial::from_roots(poles, 1.0);
    constexpr int samples = 240;
    Eigen::MatrixXd m(2 * samples, n + 1);
    Eigen::VectorXd rhs(2 * samples);
    for (int k = 0; k < samples; ++k) {
        const double w = w_lo * std::pow(w_hi / w_lo, static_cast<double>(k) / (samples - 1));
        const std::complex<double> s{0.0, w};
        const std::complex<double> target = exact(s) * den(s);
        const double weight = 1.0 / std::max(std::abs(target), 1e-12);
        std::complex<double> sp{1.0, 0.0};
        for (int c = 0; c <= n; ++c) {
            m(2 * k, c) = weight * sp.real();
            m(2 * k + 1, c) = weight * sp.imag();
            sp *= s;
        }
        rhs(2 * k) = weight * target.real();
        rhs(2 * k + 1) = weight * target.imag();
    }
    const Eigen::VectorXd coeffs = m.colPivHouseholderQr().solve(rhs);
    Polynomial num;
    num.coeffs.assign(coeffs.data(), coeffs.data() + coeffs.size());
    return {num, den};
}

SisoStateSpace realize_scaled(const TransferFunction& tf, double scale) {
    SisoStateSpace s = realize(tf);
    s.a *= scale;
    s.b *= scale;
    return s;
}

void copy_by_label(const std::vector<std::string>& from_labels, const Eigen::VectorXd& from,
                   const std::vector<std::string>& to_labels, Eigen::VectorXd& to) {
    for (std::size_t k = 0; k < to_labels.size(); ++k) {
        for (std::size_t j = 0; j < from_labels.size(); ++j) {
            if (from_labels[j] == to_labels[k]) to(static_cast<Eigen::Index>(k)) = from(static_cast<Eigen::Index>(j));
        }
    }
}

}  // namespace

LinearModel pdc_design_plant(const PdcConfig& cfg, const SystemParams& sys, const ControlScheme& scheme,
                             const OperatingPoint& op) {
    const auto* open = std::get_if<OpenLoopVvc>(&scheme.inner);
    if (!open) throw ConfigError("power decoupling applies to open-loop voltage control only");

    SystemParams reduced = sys;
    if (cfg.include_filter_and_vr) {
        reduced.grid.r_g = cfg.r_g_hat;
        reduced.grid.x_g = std::max(cfg.x_g_hat, 1e-12);
    } else {
        if (!(cfg.x_g_hat > 0.0)) throw ParameterDomainError("PDC without the filter needs x_g_hat > 0");
        reduced.conv.c_f = 0.0;
        reduced.conv.l_f = cfg.x_g_hat;
        reduced.conv.r_f = cfg.r_g_hat;
        reduced.grid.r_g = 0.0;
        reduced.grid.x_g = 1e-12;
    }
    ControlScheme plain = scheme;
    OpenLoopVvc inner;
    if (cfg.include_filter_and_vr) inner.vr = open->vr;
    plain.inner = inner;
    plain.outer.avc.reset();

    const ConverterModel model(reduced, plain, LoopMode::OuterOpen);
    const References refs;
    const Eigen::VectorXd u = nominal_inputs(model, refs, op.theta0, op.e0);
    const OperatingPoint eq = solve_equilibrium(model, u, initial_guess(model, u, refs));
    const LinearModel lin = linearize(model, eq, {"theta", "E"}, {"P", "Q"});
    return drop_states(lin, {"p_meas", "q_meas"});
}

PdcDesign pdc_controllers(const PdcConfig& cfg, const SystemParams& sys, const ControlScheme& scheme,
                          const OperatingPoint& op) {
    LinearModel lin = pdc_design_plant(cfg, sys, scheme, op);
    const double w = sys.grid.omega_1;
    lin.a /= w;
    lin.b /= w;

    const TransferFunction g_tp = to_transfer_function(lin.channel("theta", "P"));
    const TransferFunction g_vp = to_transfer_function(lin.channel("E", "P"));
    const TransferFunction g_tq = to_transfer_function(lin.channel("theta", "Q"));
    const TransferFunction g_vq = to_transfer_function(lin.channel("E", "Q"));
    const Polynomial& den = g_tp.den;
    const Polynomial n_tp = trimmed(g_tp.num);
    const Polynomial n_vp = trimmed(g_vp.num);
    const Polynomial n_tq = trimmed(g_tq.num);
    const Polynomial n_vq = trimmed(g_vq.num);

    PdcDesign out;
    out.omega_scale = w;
    // fit band 0.5-150 Hz around a 50 Hz fundamental, in units of omega_1
    const double w_lo = kTwoPi * 0.5 / w;
    const double w_hi = kTwoPi * 150.0 / w;
    out.c_v_theta = stabilized(quotient(negated(n_vp), n_tp, out.non_proper), w_lo, w_hi, out.refitted);
    out.c_theta_v = stabilized(quotient(negated(n_tq), n_vq, out.non_proper), w_lo, w_hi, out.refitted);
    // F_thetaP = G_thetaP + C_thetaV G_VP; F_VQ = G_VQ + C_Vtheta G_thetaQ
    const Polynomial cross = n_tp * n_vq;
    const Polynomial mixed = negated(n_tq * n_vp);
    bool unused = false;
    out.f_theta_p = quotient(sum(cross, mixed), den * n_vq, unused);
    out.f_v_q = quotient(sum(cross, mixed), den * n_tp, unused);

    out.injection.theta_from_e = realize_scaled(out.c_v_theta, w);
    out.injection.e_from_theta = realize_scaled(out.c_theta_v, w);
    out.injection.theta0 = op.theta0;
    out.injection.e0 = op.e0;
    return out;
}

PreparedModel prepare_model(const SystemParams& sys, const ControlScheme& scheme, const References& refs,
                            LoopMode mode) {
    const ConverterModel base(sys, scheme, LoopMode::Closed);
    const OperatingPoint op = solve_operating_point(base, refs);

    std::optional<PdcDesign> design;
    std::optional<PdcInjection> injection;
    if (scheme.has_pdc() && mode != LoopMode::Frozen) {
        design = pdc_controllers(*std::get<OpenLoopVvc>(scheme.inner).pdc, sys, scheme, op);
        injection = design->injection;
    }

    if (mode == LoopMode::Closed) {
        if (!injection) return {base, op, design};
        ConverterModel model(sys, scheme, LoopMode::Closed, injection);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.state_size()));
        x.head(op.x0.size()) = op.x0;
        return {model, describe_point(model, x, op.u0), design};
    }

    if (mode == LoopMode::Frozen) {
        ConverterModel model(sys, scheme, LoopMode::Frozen);
        Eigen::VectorXd dx(op.x0.size());
        const ModelSignals s = base.evaluate({op.x0.data(), static_cast<std::size_t>(op.x0.size())},
                                             {op.u0.data(), static_cast<std::size_t>(op.u0.size())},
                                             {dx.data(), static_cast<std::size_t>(dx.size())});
        const ComplexDq e = from_frame(s.e_cmd, s.theta);
        Eigen::VectorXd u(2);
        u << e.real(), e.imag();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.state_size()));
        copy_by_label(base.state_labels(), op.x0, model.state_labels(), x);
        return {model, solve_equilibrium(model, u, x), design};
    }

    ConverterModel model(sys, scheme, LoopMode::OuterOpen, injection);
    const double theta_sync = op.x0(base.theta_index());
    Eigen::VectorXd u = nominal_inputs(model, refs, theta_sync, op.e0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.state_size()));
    copy_by_label(base.state_labels(), op.x0, model.state_labels(), x);
    return {model, solve_equilibrium(model, u, x), design};
}

}  // namespace gfmlab
