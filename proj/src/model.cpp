#include "gfmlab/model.hpp"

#include <algorithm>
#include <cmath>

#include "gfmlab/errors.hpp"

namespace gfmlab {

namespace {

void append(std::vector<std::string>& labels, const std::vector<std::string>& extra) {
    labels.insert(labels.end(), extra.begin(), extra.end());
}

int find_label(const std::vector<std::string>& labels, const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

double siso_step(const SisoStateSpace& sys, std::span<const double> x, std::span<double> dx, double u) {
    const int n = sys.order();
    double y = sys.d * u;
    for (int r = 0; r < n; ++r) y += sys.c(r) * x[r];
    if (!dx.empty()) {
        for (int r = 0; r < n; ++r) {
            double acc = sys.b(r) * u;
            for (int k = 0; k < n; ++k) acc += sys.a(r, k) * x[k];
            dx[r] = acc;
        }
    }
    return y;
}

}  // namespace

ConverterModel::ConverterModel(SystemParams sys, ControlScheme scheme, LoopMode mode,
                               std::optional<PdcInjection> pdc)
    : sys_(std::move(sys)), scheme_(std::move(scheme)), mode_(mode), pdc_(std::move(pdc)) {
    sys_.grid.validate();
    sys_.conv.validate();
    scheme_.validate();
    series_plant_ = sys_.conv.c_f == 0.0;

    if (pdc_ && mode_ == LoopMode::Frozen) throw ConfigError("power decoupling needs the control loops");
    if (pdc_ && !std::holds_alternative<OpenLoopVvc>(scheme_.inner)) {
        throw ConfigError("power decoupling applies to open-loop voltage control only");
    }
    if (series_plant_ && mode_ != LoopMode::Frozen) {
        const auto* open = std::get_if<OpenLoopVvc>(&scheme_.inner);
        const bool avc = mode_ == LoopMode::Closed && scheme_.outer.avc.has_value();
        if (!open || open->prf || avc) {
            throw ConfigError("capacitor-free plant supports open-loop voltage control without "
                              "power-reference feedforward or voltage control only");
        }
    }

    if (series_plant_) {
        state_labels_ = {"i.d", "i.q"};
    } else {
        state_labels_ = {"i_f.d", "i_f.q", "v.d", "v.q", "i_g.d", "i_g.q"};
    }

    if (mode_ == LoopMode::Frozen) {
        input_labels_ = {"ed", "eq"};
        return;
    }

    const int base = static_cast<int>(state_labels_.size());
    if (mode_ == LoopMode::Closed) {
        theta_off_ = base;
        state_labels_.emplace_back("theta");
        sync_off_ = static_cast<int>(state_labels_.size());
        if (scheme_.uses_pll()) {
            state_labels_.emplace_back("pll_int");
        } else {
            append(state_labels_, psc_state_labels(scheme_.psc));
        }
        sync_n_ = static_cast<int>(state_labels_.size()) - sync_off_;
        outer_off_ = static_cast<int>(state_labels_.size());
        append(state_labels_, outer_state_labels(scheme_.outer));
        outer_n_ = static_cast<int>(state_labels_.size()) - outer_off_;
        input_labels_ = {"p_ref", "q_ref", "v_ref", "dtheta", "dE", "did", "diq"};
    } else {
        input_labels_ = {"theta", "E", "p_ref", "q_ref", "v_ref", "did", "diq"};
    }
    meas_off_ = static_cast<int>(state_labels_.size());
    state_labels_.emplace_back("p_meas");
    state_labels_.emplace_back("q_meas");
    inner_off_ = static_cast<int>(state_labels_.size());
    append(state_labels_, inner_state_labels(scheme_.inner));
    inner_n_ = static_cast<int>(state_labels_.size()) - inner_off_;

    if (pdc_) {
        pdc_te_off_ = static_cast<int>(state_labels_.size());
        pdc_te_n_ = pdc_->theta_from_e.order();
        for (int k = 0; k < pdc_te_n_; ++k) state_labels_.push_back("pdc_te_" + std::to_string(k));
        pdc_et_off_ = static_cast<int>(state_labels_.size());
        pdc_et_n_ = pdc_->e_from_theta.order();
        for (int k = 0; k < pdc_et_n_; ++k) state_labels_.push_back("pdc_et_" + std::to_string(k));
    }
}

void ConverterModel::set_grid(const GridParams& grid) {
    try {
        grid.validate();
    } catch (const ParameterDomainError& e) {
        throw ConfigError(e.what());
    }
    sys_.grid = grid;
}

const std::vector<std::string>& ConverterModel::output_labels() {
    static const std::vector<std::string> labels = {
        "P",  "Q",     "Pm",    "Qm", "vd", "vq", "id",    "iq",    "ifd",     "ifq",      "Vmag",
        "omega", "theta", "E", "ed", "eq", "idref", "iqref", "as_term", "igd_grid", "igq_grid"};
    return labels;
}

int ConverterModel::state_index(const std::string& label) const { return find_label(state_labels_, label); }
int ConverterModel::input_index(const std::string& label) const { return find_label(input_labels_, label); }
int ConverterModel::output_index(const std::string& label) { return find_label(output_labels(), label); }

CircuitState ConverterModel::circuit(std::span<const double> x) const {
    if (series_plant_) {
        const ComplexDq i{x[0], x[1]};
        return {i, ComplexDq{}, i};
    }
    return {{x[0], x[1]}, {x[2], x[3]}, {x[4], x[5]}};
}

void ConverterModel::set_circuit(std::span<double> x, const CircuitState& c) const {
    x[0] = c.i_f.real();
    x[1] = c.i_f.imag();
    if (series_plant_) return;
    x[2] = c.v.real();
    x[3] = c.v.imag();
    x[4] = c.i_g.real();
    x[5] = c.i_g.imag();
}

ModelSignals ConverterModel::evaluate(std::span<const double> x, std::span<const double> u,
                                      std::span<double> dx) const {
    if (x.size() != state_size() || u.size() != input_size()) {
        throw VariantMismatch("state or input vector length does not match the model");
    }
    const bool want_dx = !dx.empty();
    if (want_dx && dx.size() != state_size()) throw VariantMismatch("derivative vector length mismatch");
    auto dspan = [&](int off, int n) { return want_dx ? dx.subspan(off, n) : std::span<double>{}; };
    // scratch for blocks whose derivatives are discarded
    double scratch[16] = {};
    auto dblock = [&](int off, int n) {
        return want_dx ? dx.subspan(off, n) : std::span<double>(scratch, static_cast<std::size_t>(n));
    };

    const double w1 = sys_.grid.omega_1;
    const double kappa = sys_.conv.kappa;
    CircuitState c = circuit(x);
    ModelSignals s;

    if (mode_ == LoopMode::Frozen) {
        const ComplexDq e{u[0], u[1]};
        const CircuitState d = circuit_derivatives(c, e, sys_.grid, sys_.conv);
        if (series_plant_) c.v = series_poc_voltage(c.i_f, d.i_f, sys_.grid);
        if (want_dx) set_circuit(dx, d);
        s.v = c.v;
        s.i_g = c.i_g;
        s.i_f = c.i_f;
        s.i_g_grid = c.i_g;
        s.v_mag = std::abs(c.v);
        s.omega = w1;
        s.e_cmd = e;
        s.e_mag = std::abs(e);
        const PowerPair pq = instantaneous_power(c.v, c.i_g, kappa);
        s.p = s.p_meas = pq.p;
        s.q = s.q_meas = pq.q;
        return s;
    }

    const bool closed = mode_ == LoopMode::Closed;
    const double p_ref = closed ? u[0] : u[2];
    const double q_ref = closed ? u[1] : u[3];
    const double v_ref = closed ? u[2] : u[4];
    const ComplexDq i_dist{u[5], u[6]};

    const double pm = x[meas_off_];
    const double qm = x[meas_off_ + 1];
    const double v_mag_state = series_plant_ ? 0.0 : std::abs(c.v);

    double theta_sync = 0.0;
    double e_outer = 0.0;
    if (closed) {
        theta_sync = x[theta_off_];
        e_outer = outer_voltage_step(scheme_.outer, x.subspan(outer_off_, outer_n_), dblock(outer_off_, outer_n_),
                                     qm, q_ref, v_mag_state, v_ref);
    } else {
        theta_sync = u[0];
        e_outer = u[1];
    }

    double theta = theta_sync;
    double e_mag = e_outer;
    if (pdc_) {
        theta += siso_step(pdc_->theta_from_e, x.subspan(pdc_te_off_, pdc_te_n_), dspan(pdc_te_off_, pdc_te_n_),
                           e_outer - pdc_->e0);
        e_mag += siso_step(pdc_->e_from_theta, x.subspan(pdc_et_off_, pdc_et_n_), dspan(pdc_et_off_, pdc_et_n_),
                           theta_sync - pdc_->theta0);
    }
    if (closed) {
        theta += u[3];
        e_mag += u[4];
    }

    InnerInputs in;
    in.e_mag = e_mag;
    in.v = to_frame(c.v, theta);
    in.i_f = to_frame(c.i_f, theta);
    in.i_g = to_frame(c.i_g, theta);
    in.p_ref = p_ref;
    in.v_mag = v_mag_state;
    in.i_ref_dist = i_dist;

    const auto xi = x.subspan(inner_off_, inner_n_);
    const auto dxi = dblock(inner_off_, inner_n_);
    InnerOutput inner;
    if (const auto* open = std::get_if<OpenLoopVvc>(&scheme_.inner)) {
        inner = open_loop_inner_step(*open, xi, dxi, in, kappa);
    } else {
        inner = closed_loop_inner_step(std::get<ClosedLoopVvc>(scheme_.inner), xi, dxi, in, sys_);
    }

    const ComplexDq e_grid = from_frame(inner.e_cmd, theta);
    const CircuitState d = circuit_derivatives(c, e_grid, sys_.grid, sys_.conv);
    if (series_plant_) {
        c.v = series_poc_voltage(c.i_f, d.i_f, sys_.grid);
        in.v = to_frame(c.v, theta);
    }
    if (want_dx) set_circuit(dx, d);

    const PowerPair pq = instantaneous_power(in.v, in.i_g, kappa);
    if (want_dx) {
        dx[meas_off_] = scheme_.omega_meas * (pq.p - pm);
        dx[meas_off_ + 1] = scheme_.omega_meas * (pq.q - qm);
    }

    double omega = w1;
    if (closed) {
        double rate = 0.0;
        if (scheme_.uses_pll()) {
            const auto& gv = std::get<GfmVccAddOn>(std::get<ClosedLoopVvc>(scheme_.inner).add_on);
            const PllOutput o = pll_step(gv.pll, x.subspan(sync_off_, sync_n_), dblock(sync_off_, sync_n_),
                                         in.v.imag(), w1);
            omega = o.omega;
            rate = o.dtheta_dt;
        } else {
            const PscOutput o = psc_step(scheme_.psc, x.subspan(sync_off_, sync_n_), dblock(sync_off_, sync_n_),
                                         pm, p_ref, in.v.imag(), w1);
            omega = o.omega;
            rate = o.dtheta_dt;
        }
        if (want_dx) dx[theta_off_] = rate;
    }

    s.p = pq.p;
    s.q = pq.q;
    s.p_meas = pm;
    s.q_meas = qm;
    s.v = in.v;
    s.i_g = in.i_g;
    s.i_f = in.i_f;
    s.i_g_grid = c.i_g;
    s.v_mag = std::abs(c.v);
    s.omega = omega;
    s.theta = theta;
    s.e_mag = e_mag;
    s.e_cmd = inner.e_cmd;
    s.i_ref = inner.i_ref;
    s.as_term = inner.as_term;
    return s;
}

Eigen::VectorXd ConverterModel::derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    Eigen::VectorXd dx(x.size());
    evaluate({x.data(), static_cast<std::size_t>(x.size())}, {u.data(), static_cast<std::size_t>(u.size())},
             {dx.data(), static_cast<std::size_t>(dx.size())});
    return dx;
}

Eigen::VectorXd ConverterModel::pack_outputs(const ModelSignals& s) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(output_labels().size()));
    y << s.p, s.q, s.p_meas, s.q_meas, s.v.real(), s.v.imag(), s.i_g.real(), s.i_g.imag(), s.i_f.real(),
        s.i_f.imag(), s.v_mag, s.omega, s.theta, s.e_mag, s.e_cmd.real(), s.e_cmd.imag(), s.i_ref.real(),
        s.i_ref.imag(), s.as_term, s.i_g_grid.real(), s.i_g_grid.imag();
    return y;
}

Eigen::VectorXd ConverterModel::outputs(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    // the capacitor-free POC voltage depends on di/dt, so derivatives are always evaluated
    Eigen::VectorXd dx(x.size());
    const ModelSignals s = evaluate({x.data(), static_cast<std::size_t>(x.size())},
                                    {u.data(), static_cast<std::size_t>(u.size())},
                                    {dx.data(), static_cast<std::size_t>(dx.size())});
    return pack_outputs(s);
}

}  // namespace gfmlab
