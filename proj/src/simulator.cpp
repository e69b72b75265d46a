#include "gfmlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gfmlab/errors.hpp"
#include "gfmlab/pdc.hpp"
#include "number_format.hpp"

namespace gfmlab {

namespace {

constexpr double kDivergenceBound = 1e3;

bool out_of_bounds(const Eigen::VectorXd& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x(k)) || std::abs(x(k)) > kDivergenceBound) return true;
    }
    return false;
}

}  // namespace

void Scenario::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("scenario duration must be > 0");
    double prev = -1.0;
    for (const auto& e : events) {
        if (!(e.time >= 0.0) || e.time > duration) throw ConfigError("event time outside the scenario duration");
        if (!(e.time > prev)) throw ConfigError("event times must be strictly increasing");
        prev = e.time;
    }
}

double Scenario::last_event_time() const { return events.empty() ? 0.0 : events.back().time; }

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("time step must be > 0");
    if (dt > 1e-4) throw ConfigError("time step must not exceed 1e-4 s");
    if (record_decimation < 1) throw ConfigError("record decimation must be >= 1");
}

SimTrace::SimTrace(double sample_period, std::vector<std::string> names)
    : sample_period_(sample_period), names_(std::move(names)), columns_(names_.size()) {}

bool SimTrace::has(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& SimTrace::channel(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InsufficientData("trace has no channel '" + name + "'");
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

void SimTrace::append(const std::vector<double>& row) {
    for (std::size_t k = 0; k < columns_.size(); ++k) columns_[k].push_back(row[k]);
}

void SimTrace::reserve(std::size_t n) {
    for (auto& c : columns_) c.reserve(n);
}

void apply_event(SimState& state, const EventAction& action) {
    ConverterModel& model = *state.model;
    auto set_input = [&](const char* label, double value) {
        const int k = model.input_index(label);
        if (k < 0) throw ConfigError(std::string("model has no input '") + label + "'");
        state.u(k) = value;
    };
    if (const auto* p = std::get_if<StepPref>(&action)) {
        set_input("p_ref", p->value);
    } else if (const auto* q = std::get_if<StepQref>(&action)) {
        set_input("q_ref", q->value);
    } else if (const auto* v = std::get_if<StepVref>(&action)) {
        set_input("v_ref", v->value);
    } else {
        model.set_grid(std::get<SetGrid>(action).grid);
    }
}

SimResult run_scenario(const Scenario& scn, const SimConfig& cfg) {
    scn.validate();
    cfg.validate();
    PreparedModel prepared = prepare_model(scn.system, scn.scheme, scn.refs, LoopMode::Closed);
    ConverterModel& model = prepared.model;

    std::vector<std::string> names{"t"};
    for (const auto& l : ConverterModel::output_labels()) names.push_back(l);
    SimResult result;
    result.initial = prepared.op;
    result.trace = SimTrace(cfg.dt * cfg.record_decimation, names);

    SimState st{&model, prepared.op.x0, prepared.op.u0};
    const auto n = static_cast<std::size_t>(st.x.size());
    const auto steps = static_cast<long>(std::llround(scn.duration / cfg.dt));
    result.trace.reserve(static_cast<std::size_t>(steps / cfg.record_decimation + 2));

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double> row(names.size());
    auto rhs = [&](const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        model.evaluate({x.data(), n}, {st.u.data(), static_cast<std::size_t>(st.u.size())}, {dx.data(), n});
    };
    auto record = [&](double t) {
        Eigen::VectorXd dx(n);
        const ModelSignals s = model.evaluate({st.x.data(), n}, {st.u.data(), static_cast<std::size_t>(st.u.size())},
                                              {dx.data(), n});
        const Eigen::VectorXd y = ConverterModel::pack_outputs(s);
        row[0] = t;
        for (Eigen::Index k = 0; k < y.size(); ++k) row[static_cast<std::size_t>(k) + 1] = y(k);
        result.trace.append(row);
    };

    std::size_t next_event = 0;
    const double h = cfg.dt;
    for (long step = 0; step <= steps; ++step) {
        const double t = static_cast<double>(step) * h;
        while (next_event < scn.events.size() && scn.events[next_event].time <= t + 1e-9 * h) {
            apply_event(st, scn.events[next_event].action);
            ++next_event;
        }
        if (step % cfg.record_decimation == 0) record(t);
        if (step == steps) break;
        try {
            rhs(st.x, k1);
            tmp = st.x + 0.5 * h * k1;
            rhs(tmp, k2);
            tmp = st.x + 0.5 * h * k2;
            rhs(tmp, k3);
            tmp = st.x + h * k3;
            rhs(tmp, k4);
            tmp = st.x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } catch (const NumericError&) {
            result.diverged_at = t + h;
            break;
        }
        if (out_of_bounds(tmp)) {
            result.diverged_at = t + h;
            break;
        }
        st.x = tmp;
    }
    result.final_state = st.x;
    return result;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace, const std::vector<std::string>& extra) {
    static const std::vector<std::string> header = {"t", "P", "Q", "vd", "vq", "id", "iq", "Vmag", "omega", "theta"};
    std::vector<std::string> cols = header;
    cols.insert(cols.end(), extra.begin(), extra.end());
    std::vector<const std::vector<double>*> data;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        os << (k ? "," : "") << cols[k];
        data.push_back(&trace.channel(cols[k]));
    }
    os << '\n';
    for (std::size_t r = 0; r < trace.size(); ++r) {
        for (std::size_t k = 0; k < data.size(); ++k) os << (k ? "," : "") << detail::num((*data[k])[r]);
        os << '\n';
    }
}

}  // namespace gfmlab
