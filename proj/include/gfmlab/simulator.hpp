#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gfmlab/control.hpp"
#include "gfmlab/model.hpp"
#include "gfmlab/operating_point.hpp"
#include "gfmlab/plant.hpp"

namespace gfmlab {

struct StepPref {
    double value = 0.0;

    bool operator==(const StepPref&) const = default;
};
struct StepQref {
    double value = 0.0;

    bool operator==(const StepQref&) const = default;
};
struct StepVref {
    double value = 1.0;

    bool operator==(const StepVref&) const = default;
};
struct SetGrid {
    GridParams grid;

    bool operator==(const SetGrid&) const = default;
};

using EventAction = std::variant<StepPref, StepQref, StepVref, SetGrid>;

struct Event {
    double time = 0.2;
    EventAction action;

    bool operator==(const Event&) const = default;
};

struct Scenario {
    SystemParams system;
    ControlScheme scheme;
    References refs;
    std::vector<Event> events;
    double duration = 2.0;

    /// Throws ConfigError for unordered or out-of-range events.
    void validate() const;
    /// Time of the last event, or 0 without events.
    double last_event_time() const;

    bool operator==(const Scenario&) const = default;
};

struct SimConfig {
    double dt = 50e-6;
    int record_decimation = 10;

    void validate() const;

    bool operator==(const SimConfig&) const = default;
};

/// Uniformly sampled named channels. "t" comes first.
class SimTrace {
public:
    SimTrace() = default;
    SimTrace(double sample_period, std::vector<std::string> names);

    double sample_period() const { return sample_period_; }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return columns_.empty() ? 0 : columns_.front().size(); }
    bool has(const std::string& name) const;
    /// Throws InsufficientData for a missing channel.
    const std::vector<double>& channel(const std::string& name) const;

    void append(const std::vector<double>& row);
    void reserve(std::size_t n);

private:
    double sample_period_ = 0.0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

struct SimResult {
    SimTrace trace;
    std::optional<double> diverged_at;  ///< set when a state left the 1e3 p.u. box or became non-finite
    OperatingPoint initial;
    Eigen::VectorXd final_state;

    bool diverged() const { return diverged_at.has_value(); }
};

/// Mutable run state the events act on.
struct SimState {
    ConverterModel* model = nullptr;
    Eigen::VectorXd x;
    Eigen::VectorXd u;
};

/// Applies one event between integration steps. States are never modified.
void apply_event(SimState& state, const EventAction& action);

/// Fixed-step RK4 run from the scenario's equilibrium.
SimResult run_scenario(const Scenario& scn, const SimConfig& cfg = {});

/// Writes t,P,Q,vd,vq,id,iq,Vmag,omega,theta; extra channels follow when requested.
void write_trace_csv(std::ostream& os, const SimTrace& trace, const std::vector<std::string>& extra = {});

}  // namespace gfmlab
