#include "gfmlab/operating_point.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gfmlab/errors.hpp"

namespace gfmlab {

namespace {

constexpr ComplexDq kJ{0.0, 1.0};

struct SourceGuess {
    double theta = 0.0;
    CircuitState circuit;  // grid frame
    PowerPair pq;
};

/// Source E at angle theta behind z_s at the POC (or behind the filter when behind_filter).
CircuitState source_circuit(double e, double theta, ComplexDq z_s, bool behind_filter, const SystemParams& sys) {
    const ComplexDq src = std::polar(e, theta);
    if (behind_filter) return circuit_steady_state(src, sys.grid, sys.conv);
    const ComplexDq z_g{sys.grid.r_g, sys.grid.x_g};
    const ComplexDq i_g = (src - sys.grid.v_g) / (z_s + z_g);
    const ComplexDq v = sys.grid.v_g + z_g * i_g;
    return {i_g + kJ * sys.conv.c_f * v, v, i_g};
}

SourceGuess match_power(double e, double p_target, ComplexDq z_s, bool behind_filter, const SystemParams& sys) {
    auto eval = [&](double th) {
        SourceGuess g;
        g.theta = th;
        g.circuit = source_circuit(e, th, z_s, behind_filter, sys);
        g.pq = instantaneous_power(g.circuit.v, g.circuit.i_g, sys.conv.kappa);
        return g;
    };
    // coarse scan for the first sign change on the stable side, then bisection
    constexpr int n = 180;
    const double lo = -std::numbers::pi / 2.0;
    const double hi = std::numbers::pi / 2.0;
    SourceGuess best = eval(0.0);
    double prev_th = lo;
    double prev_err = eval(lo).pq.p - p_target;
    for (int k = 1; k <= n; ++k) {
        const double th = lo + (hi - lo) * k / n;
        const SourceGuess g = eval(th);
        const double err = g.pq.p - p_target;
        if (std::abs(err) < std::abs(best.pq.p - p_target)) best = g;
        if ((prev_err <= 0.0) != (err <= 0.0)) {
            double a = prev_th;
            double b = th;
            double fa = prev_err;
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = eval(m).pq.p - p_target;
                if ((fa <= 0.0) == (fm <= 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            return eval(0.5 * (a + b));
        }
        prev_th = th;
        prev_err = err;
    }
    return best;
}

Eigen::MatrixXd jacobian(const ConverterModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd xp = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
        xp(j) = x(j) + h;
        const Eigen::VectorXd fp = model.derivatives(xp, u);
        xp(j) = x(j) - h;
        const Eigen::VectorXd fm = model.derivatives(xp, u);
        xp(j) = x(j);
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

/// Plain damped Newton. Returns true when the residual tolerance is met.
bool newton(const ConverterModel& model, const Eigen::VectorXd& u, Eigen::VectorXd& x, const NewtonOptions& opts) {
    Eigen::VectorXd f;
    try {
        f = model.derivatives(x, u);
    } catch (const DegenerateVoltage&) {
        return false;
    }
    if (!finite(f)) return false;
    double norm = f.norm();
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (norm < opts.tolerance) return true;
        Eigen::VectorXd step;
        try {
            const Eigen::MatrixXd jac = jacobian(model, x, u);
            if (!jac.allFinite()) return false;
            step = jac.colPivHouseholderQr().solve(-f);
        } catch (const DegenerateVoltage&) {
            return false;
        }
        if (!finite(step)) return false;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
            const Eigen::VectorXd trial = x + lambda * step;
            try {
                const Eigen::VectorXd ft = model.derivatives(trial, u);
                if (finite(ft) && ft.norm() < norm) {
                    x = trial;
                    f = ft;
                    norm = ft.norm();
                    accepted = true;
                    break;
                }
            } catch (const DegenerateVoltage&) {
            }
            lambda *= 0.5;
        }
        if (!accepted) return norm < opts.tolerance;
    }
    return norm < opts.tolerance;
}

ComplexDq source_impedance(const ControlScheme& scheme, bool& behind_filter) {
    behind_filter = false;
    if (std::holds_alternative<OpenLoopVvc>(scheme.inner)) {
        behind_filter = true;
        return {};
    }
    const auto& c = std::get<ClosedLoopVvc>(scheme.inner);
    if (const auto* vi = std::get_if<ViAddOn>(&c.add_on)) return {vi->r_v, vi->l_v};
    if (const auto* va = std::get_if<VaAddOn>(&c.add_on)) return {va->r_v, va->l_v};
    if (const auto* gv = std::get_if<GfmVccAddOn>(&c.add_on)) return {gv->va.r_v, gv->va.l_v};
    return {};
}

}  // namespace

Eigen::VectorXd nominal_inputs(const ConverterModel& model, const References& refs, double theta, double e_mag) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.input_size()));
    switch (model.mode()) {
        case LoopMode::Closed:
            u(0) = refs.p_ref;
            u(1) = refs.q_ref;
            u(2) = refs.v_ref;
            break;
        case LoopMode::OuterOpen:
            u(0) = theta;
            u(1) = e_mag;
            u(2) = refs.p_ref;
            u(3) = refs.q_ref;
            u(4) = refs.v_ref;
            break;
        case LoopMode::Frozen: {
            const ComplexDq e = std::polar(e_mag, theta);
            u(0) = e.real();
            u(1) = e.imag();
            break;
        }
    }
    return u;
}

Eigen::VectorXd initial_guess(const ConverterModel& model, const Eigen::VectorXd& u, const References& refs) {
    const SystemParams& sys = model.system();
    const ControlScheme& scheme = model.scheme();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.state_size()));

    if (model.mode() == LoopMode::Frozen) {
        const CircuitState c = circuit_steady_state({u(0), u(1)}, sys.grid, sys.conv);
        model.set_circuit({x.data(), static_cast<std::size_t>(x.size())}, c);
        return x;
    }

    bool behind_filter = false;
    const ComplexDq z_s = source_impedance(scheme, behind_filter);
    SourceGuess g;
    double e_mag = 1.0;
    double frame = 0.0;
    if (model.mode() == LoopMode::OuterOpen) {
        e_mag = u(1);
        frame = u(0);
        g.theta = frame;
        g.circuit = source_circuit(e_mag, frame, z_s, behind_filter, sys);
        g.pq = instantaneous_power(g.circuit.v, g.circuit.i_g, sys.conv.kappa);
    } else {
        e_mag = scheme.outer.e_nom;
        for (int pass = 0; pass < 3; ++pass) {
            g = match_power(e_mag, refs.p_ref, z_s, behind_filter, sys);
            e_mag = scheme.outer.e_nom + scheme.outer.k_q * (refs.q_ref - g.pq.q);
            if (scheme.outer.avc) e_mag += refs.v_ref - std::abs(g.circuit.v);
        }
        frame = scheme.uses_pll() ? std::arg(g.circuit.v) : g.theta;
        x(model.theta_index()) = frame;
        if (scheme.outer.avc) {
            x(model.outer_offset()) = e_mag - scheme.outer.e_nom - scheme.outer.k_q * (refs.q_ref - g.pq.q);
        }
    }
    model.set_circuit({x.data(), static_cast<std::size_t>(x.size())}, g.circuit);
    x(model.meas_offset()) = g.pq.p;
    x(model.meas_offset() + 1) = g.pq.q;

    const ComplexDq v = to_frame(g.circuit.v, frame);
    const ComplexDq i_f = to_frame(g.circuit.i_f, frame);
    const int off = model.inner_offset();
    if (const auto* open = std::get_if<OpenLoopVvc>(&scheme.inner)) {
        if (open->vr) {
            if (open->prf) {
                x(off) = i_f.imag();
            } else {
                x(off) = i_f.real();
                x(off + 1) = i_f.imag();
            }
        }
    } else {
        const auto& c = std::get<ClosedLoopVvc>(scheme.inner);
        ComplexDq base = i_f;
        if (c.cap_decoupling) base -= kJ * sys.conv.c_f * v;
        x(off) = base.real();
        x(off + 1) = base.imag();
        const ComplexDq vcc = sys.conv.r_f * i_f + (c.ind_decoupling ? 0.0 : 1.0) * kJ * sys.conv.l_f * i_f;
        x(off + 2) = vcc.real();
        x(off + 3) = vcc.imag();
        int next = off + 4;
        if (std::holds_alternative<ViAddOn>(c.add_on)) {
            const ComplexDq i_g = to_frame(g.circuit.i_g, frame);
            x(next) = i_g.real();
            x(next + 1) = i_g.imag();
            next += 2;
        }
        if (c.v_ff_bandwidth > 0.0) {
            x(next) = v.real();
            x(next + 1) = v.imag();
        }
    }
    return x;
}

OperatingPoint describe_point(const ConverterModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(x.size());
    const ModelSignals s = model.evaluate({x.data(), static_cast<std::size_t>(x.size())},
                                          {u.data(), static_cast<std::size_t>(u.size())},
                                          {dx.data(), static_cast<std::size_t>(dx.size())});
    OperatingPoint op;
    op.theta0 = s.theta;
    op.e0 = s.e_mag;
    op.v0 = s.v;
    op.i0_f = s.i_f;
    op.i0_g = s.i_g;
    op.p0 = s.p;
    op.q0 = s.q;
    op.x0 = x;
    op.u0 = u;
    return op;
}

OperatingPoint solve_equilibrium(const ConverterModel& model, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& x_guess, const NewtonOptions& opts) {
    Eigen::VectorXd x = x_guess;
    if (newton(model, u, x, opts)) return describe_point(model, x, u);

    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> angle(-0.4, 0.4);
    std::uniform_real_distribution<double> scale(0.8, 1.2);
    for (int r = 0; r < opts.restarts; ++r) {
        x = x_guess;
        const int n_circuit = model.system().conv.c_f == 0.0 ? 2 : 6;
        for (int k = 0; k < n_circuit; ++k) x(k) *= scale(rng);
        if (model.theta_index() >= 0) x(model.theta_index()) += angle(rng);
        for (Eigen::Index k = n_circuit; k < x.size(); ++k) {
            if (static_cast<int>(k) != model.theta_index()) x(k) *= scale(rng);
        }
        if (newton(model, u, x, opts)) return describe_point(model, x, u);
    }
    throw NoEquilibrium("no steady-state point found (Newton failed from the initial guess and " +
                        std::to_string(opts.restarts) + " restarts)");
}

OperatingPoint solve_operating_point(const ConverterModel& model, const References& refs,
                                     const NewtonOptions& opts) {
    if (model.mode() != LoopMode::Closed) {
        throw ConfigError("solve_operating_point needs a closed-loop model; use solve_equilibrium");
    }
    const Eigen::VectorXd u = nominal_inputs(model, refs);
    return solve_equilibrium(model, u, initial_guess(model, u, refs), opts);
}

OperatingPoint solve_operating_point(const SystemParams& sys, const ControlScheme& scheme, double p_ref,
                                     double v_or_q_ref) {
    References refs;
    refs.p_ref = p_ref;
    if (scheme.outer.avc) {
        refs.v_ref = v_or_q_ref;
    } else {
        refs.q_ref = v_or_q_ref;
    }
    const ConverterModel model(sys, scheme, LoopMode::Closed);
    return solve_operating_point(model, refs);
}

}  // namespace gfmlab
