#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfmlab/control.hpp"
#include "gfmlab/linear.hpp"
#include "gfmlab/plant.hpp"

namespace gfmlab {

/// Which parts of the control stack are integrated as states.
enum class LoopMode {
    Closed,     ///< full system; inputs are references and additive disturbances
    OuterOpen,  ///< synchronization and magnitude loops removed; theta and E are inputs
    Frozen,     ///< bare circuit; the converter voltage (grid frame) is the input
};

/// Cross-channel injections of the power decoupling control, acting on
/// deviations from the design operating point.
struct PdcInjection {
    SisoStateSpace theta_from_e;  ///< delta E_rpc -> theta injection
    SisoStateSpace e_from_theta;  ///< delta theta_psc -> E injection
    double theta0 = 0.0;
    double e0 = 1.0;
};

/// Every signal the model can report for one state/input pair.
struct ModelSignals {
    double p = 0.0;
    double q = 0.0;
    double p_meas = 0.0;
    double q_meas = 0.0;
    ComplexDq v;         ///< POC voltage, converter frame
    ComplexDq i_g;       ///< output current, converter frame
    ComplexDq i_f;       ///< converter current, converter frame
    ComplexDq i_g_grid;  ///< output current, grid frame
    double v_mag = 0.0;
    double omega = 0.0;
    double theta = 0.0;  ///< frame angle relative to the grid
    double e_mag = 0.0;  ///< magnitude reference after injections
    ComplexDq e_cmd;     ///< converter voltage, converter frame
    ComplexDq i_ref;
    double as_term = 0.0;
};

/// Plant and controllers assembled into one ODE dx/dt = f(x, u).
///
/// Electrical states live in the grid-synchronous frame; the converter frame
/// leads it by the angle theta.
class ConverterModel {
public:
    ConverterModel(SystemParams sys, ControlScheme scheme, LoopMode mode = LoopMode::Closed,
                   std::optional<PdcInjection> pdc = std::nullopt);

    const SystemParams& system() const { return sys_; }
    const ControlScheme& scheme() const { return scheme_; }
    LoopMode mode() const { return mode_; }
    bool has_pdc() const { return pdc_.has_value(); }

    /// Replaces the grid between integration steps; states are left untouched.
    void set_grid(const GridParams& grid);

    std::size_t state_size() const { return state_labels_.size(); }
    std::size_t input_size() const { return input_labels_.size(); }
    const std::vector<std::string>& state_labels() const { return state_labels_; }
    const std::vector<std::string>& input_labels() const { return input_labels_; }
    static const std::vector<std::string>& output_labels();

    /// Index of a label, or -1.
    int state_index(const std::string& label) const;
    int input_index(const std::string& label) const;
    static int output_index(const std::string& label);

    /// Evaluates the right-hand side; dx may be empty when only signals are needed.
    ModelSignals evaluate(std::span<const double> x, std::span<const double> u, std::span<double> dx) const;

    Eigen::VectorXd derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
    Eigen::VectorXd outputs(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
    static Eigen::VectorXd pack_outputs(const ModelSignals& s);

    /// Electrical states (grid frame). For the capacitor-free plant v and i_g are not states.
    CircuitState circuit(std::span<const double> x) const;
    void set_circuit(std::span<double> x, const CircuitState& c) const;

    int theta_index() const { return theta_off_; }
    int sync_offset() const { return sync_off_; }
    int outer_offset() const { return outer_off_; }
    int meas_offset() const { return meas_off_; }
    int inner_offset() const { return inner_off_; }
    int inner_size() const { return inner_n_; }

private:
    SystemParams sys_;
    ControlScheme scheme_;
    LoopMode mode_;
    std::optional<PdcInjection> pdc_;

    std::vector<std::string> state_labels_;
    std::vector<std::string> input_labels_;

    bool series_plant_ = false;
    int theta_off_ = -1;
    int sync_off_ = -1, sync_n_ = 0;
    int outer_off_ = -1, outer_n_ = 0;
    int meas_off_ = -1;
    int inner_off_ = -1, inner_n_ = 0;
    int pdc_te_off_ = -1, pdc_te_n_ = 0;
    int pdc_et_off_ = -1, pdc_et_n_ = 0;
};

}  // namespace gfmlab
