#include "gfmlab/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gfmlab/config.hpp"
#include "gfmlab/errors.hpp"
#include "gfmlab/pdc.hpp"
#include "gfmlab/smallsignal.hpp"
#include "number_format.hpp"

namespace gfmlab {

namespace fs = std::filesystem;
using detail::num;

namespace {

// A detected resonance or eigenmode below this damping fails --expect-stable.
constexpr double kStableZeta = 0.05;
// Eigenvalue real parts above this count as unstable (finite-difference noise margin).
constexpr double kRealTolerance = 1e-6;

struct Options {
    std::string config;
    std::string out;
    bool expect_stable = false;
    bool dump = false;
    // bode
    std::string input;
    std::string output;
    std::string loop = "closed";
    double fmin = 1.0;
    double fmax = 1000.0;
    int points = 200;
    // sweep, design-check
    std::string param = "scr";
    std::vector<std::string> values;
};

/// Signals a diverged simulation; mapped to the numeric exit code.
class Diverged : public NumericError {
public:
    using NumericError::NumericError;
};

fs::path output_dir(const Options& o, const RunConfig& cfg) {
    if (!o.out.empty()) return o.out;
    const char* env = std::getenv("GFMLAB_OUT");
    const fs::path root = env && *env ? fs::path(env) : fs::path("out");
    return root / (cfg.out_dir.empty() ? fs::path(o.config).stem() : fs::path(cfg.out_dir));
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
}

LoopMode parse_loop(const std::string& s) {
    if (s == "closed") return LoopMode::Closed;
    if (s == "outer_open") return LoopMode::OuterOpen;
    if (s == "frozen") return LoopMode::Frozen;
    throw ConfigError("--loop must be closed, outer_open or frozen");
}

double grid_x_over_r(const GridParams& g) { return g.r_g > 0.0 ? g.x_g / g.r_g : kInfiniteRatio; }

struct ModalSummary {
    std::vector<Mode> modes;
    double max_real = 0.0;
    std::optional<std::size_t> dominant_index;  ///< least damped in [1 Hz, 2 f1]

    const Mode* dominant() const { return dominant_index ? &modes[*dominant_index] : nullptr; }
    bool stable() const { return max_real < kRealTolerance; }
    bool well_damped() const { return stable() && (!dominant() || dominant()->zeta >= kStableZeta); }
};

/// References and grid in force after the last event; the linearization point.
Scenario settled(Scenario s) {
    for (const Event& e : s.events) {
        std::visit(
            [&](const auto& a) {
                using A = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<A, StepPref>) s.refs.p_ref = a.value;
                if constexpr (std::is_same_v<A, StepQref>) s.refs.q_ref = a.value;
                if constexpr (std::is_same_v<A, StepVref>) s.refs.v_ref = a.value;
                if constexpr (std::is_same_v<A, SetGrid>) s.system.grid = a.grid;
            },
            e.action);
    }
    s.events.clear();
    return s;
}

ModalSummary modal_summary(const RunConfig& cfg) {
    const Scenario s = settled(cfg.scenario);
    const PreparedModel pm = prepare_model(s.system, s.scheme, s.refs, LoopMode::Closed);
    ModalSummary out;
    out.modes = eigenmodes(linearize(pm.model, pm.op));
    out.max_real = -std::numeric_limits<double>::infinity();
    for (const auto& m : out.modes) out.max_real = std::max(out.max_real, m.eigenvalue.real());
    if (const Mode* d = least_damped(out.modes, 1.0, 2.0 * cfg.f1_hz))
        out.dominant_index = static_cast<std::size_t>(d - out.modes.data());
    return out;
}

void write_modal_report(std::ostream& os, const ModalSummary& m) {
    os << "states: " << m.modes.size() << '\n'
       << "max_real: " << num(m.max_real) << '\n'
       << "stable: " << (m.stable() ? "yes" : "no") << '\n';
    if (const Mode* d = m.dominant()) {
        os << "dominant_freq_hz: " << num(d->freq_hz) << '\n'
           << "dominant_zeta: " << num(d->zeta) << '\n';
    }
}

struct RunOutcome {
    TraceAnalysis analysis;
    bool resonant = false;  ///< a detected resonance with zeta below the stability threshold
};

RunOutcome simulate(const RunConfig& cfg, const fs::path& dir) {
    const SimResult res = run_scenario(cfg.scenario, cfg.sim);
    {
        auto f = open_out(dir / "trace.csv");
        write_trace_csv(f, res.trace, {"Pm", "Qm", "E", "igd_grid", "igq_grid"});
    }
    if (res.diverged()) {
        auto f = open_out(dir / "report.txt");
        f << "status: diverged\n"
          << "time: " << num(*res.diverged_at) << '\n';
        throw Diverged("simulation diverged at t = " + num(*res.diverged_at) + " s");
    }
    RunOutcome out;
    out.analysis = analyze_trace(res.trace, cfg.scenario.last_event_time(), cfg.f1_hz, cfg.analysis);
    const TraceAnalysis& a = out.analysis;
    for (const ResonanceReport* r : {&a.power, &a.current}) {
        if (r->cls != ResonanceClass::None && r->zeta < kStableZeta) out.resonant = true;
    }
    {
        auto f = open_out(dir / "report.txt");
        f << "status: ok\n";
        write_report(f, a.power);
        write_report(f, a.current);
        if (a.coupling) {
            f << "coupling: " << (a.coupling->pass ? "pass" : "fail") << '\n'
              << "coupling_lower_hz: " << num(a.coupling->f_lower) << '\n'
              << "coupling_upper_hz: " << num(a.coupling->f_upper) << '\n';
        }
    }
    {
        auto f = open_out(dir / "report.csv");
        f << "channel,class,freq_hz,zeta,amplitude\n";
        write_report_csv_row(f, a.power);
        write_report_csv_row(f, a.current);
    }
    return out;
}

int cmd_run(const Options& o, const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = output_dir(o, cfg);
    const RunOutcome r = simulate(cfg, dir);
    out << "power: " << to_string(r.analysis.power.cls) << " f=" << num(r.analysis.power.freq_hz)
        << " Hz zeta=" << num(r.analysis.power.zeta) << '\n';
    return o.expect_stable && r.resonant ? kExitUnstable : kExitOk;
}

int cmd_modes(const Options& o, const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = output_dir(o, cfg);
    const ModalSummary m = modal_summary(cfg);
    {
        auto f = open_out(dir / "modes.csv");
        write_modes_csv(f, m.modes);
    }
    {
        auto f = open_out(dir / "report.txt");
        write_modal_report(f, m);
    }
    write_modal_report(out, m);
    return o.expect_stable && !m.well_damped() ? kExitUnstable : kExitOk;
}

int cmd_bode(const Options& o, const RunConfig& cfg, std::ostream& out) {
    if (o.input.empty() || o.output.empty()) throw ConfigError("bode needs --input and --output");
    if (!(o.fmin > 0.0 && o.fmax > o.fmin && o.points >= 2)) throw ConfigError("bode needs 0 < fmin < fmax, points >= 2");
    const Scenario s = settled(cfg.scenario);
    const PreparedModel pm = prepare_model(s.system, s.scheme, s.refs, parse_loop(o.loop));
    const LinearModel lin = linearize(pm.model, pm.op, {o.input}, {o.output});
    const std::vector<double> w = log_grid(kTwoPi * o.fmin, kTwoPi * o.fmax, o.points);
    const auto h = freq_response(lin, o.input, o.output, w);
    const fs::path dir = output_dir(o, cfg);
    auto f = open_out(dir / "bode.csv");
    write_bode_csv(f, w, h);
    out << "wrote " << (dir / "bode.csv").string() << '\n';
    return kExitOk;
}

double parse_value(const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != text.size() || !(v > 0.0)) throw ConfigError("bad sweep value '" + text + "'");
    return v;
}

RunConfig with_scr(RunConfig cfg, double scr) {
    GridParams& g = cfg.scenario.system.grid;
    g = make_grid_from_scr(scr, grid_x_over_r(g), g.v_g, g.omega_1);
    return cfg;
}

struct SweepRow {
    std::string value;
    int code = kExitOk;
    std::string message;
    std::optional<RunOutcome> run;
    std::optional<ModalSummary> modal;
};

int cmd_sweep(const Options& o, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (o.param != "scr") throw ConfigError("sweep supports --param scr only");
    if (o.values.empty()) throw ConfigError("sweep needs --values");
    const fs::path dir = output_dir(o, cfg);

    std::vector<RunConfig> cases;
    for (const auto& v : o.values) cases.push_back(with_scr(cfg, parse_value(v)));

    // Each value writes into its own subdirectory, so the cases run concurrently.
    std::vector<std::future<SweepRow>> jobs;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, [&, k] {
            SweepRow row;
            row.value = o.values[k];
            try {
                row.modal = modal_summary(cases[k]);
                row.run = simulate(cases[k], dir / ("scr_" + row.value));
                auto f = open_out(dir / ("scr_" + row.value) / "modes.csv");
                write_modes_csv(f, row.modal->modes);
            } catch (const NumericError& e) {
                row.code = kExitNumeric;
                row.message = e.what();
            } catch (const InsufficientData& e) {
                row.code = kExitNumeric;
                row.message = e.what();
            }
            return row;
        }));
    }

    auto f = open_out(dir / "sweep.csv");
    f << "scr,status,power_class,power_freq_hz,power_zeta,current_class,current_freq_hz,current_zeta,max_real,"
         "stable\n";
    int code = kExitOk;
    for (auto& job : jobs) {
        const SweepRow row = job.get();
        if (row.code != kExitOk) {
            err << "scr " << row.value << ": " << row.message << '\n';
            f << row.value << ",failed,,,,,,,,no\n";
            code = kExitNumeric;
            continue;
        }
        const auto& p = row.run->analysis.power;
        const auto& c = row.run->analysis.current;
        const bool ok = row.modal->well_damped() && !row.run->resonant;
        f << row.value << ",ok," << to_string(p.cls) << ',' << num(p.freq_hz) << ',' << num(p.zeta) << ','
          << to_string(c.cls) << ',' << num(c.freq_hz) << ',' << num(c.zeta) << ',' << num(row.modal->max_real)
          << ',' << (ok ? "yes" : "no") << '\n';
        out << "scr " << row.value << ": " << to_string(p.cls) << ", " << (ok ? "stable" : "not stable") << '\n';
        if (!ok && o.expect_stable && code == kExitOk) code = kExitUnstable;
    }
    return code;
}

int cmd_design_check(const Options& o, const RunConfig& cfg, std::ostream& out) {
    const auto* open = std::get_if<OpenLoopVvc>(&cfg.scenario.scheme.inner);
    if (!open || !open->vr) throw ConfigError("design-check needs an open-loop scheme with virtual resistance");
    std::vector<std::string> values = o.values;
    if (values.empty()) values = {"1.5", "5", "10", "20"};

    const SystemParams& sys = cfg.scenario.system;
    const double k_p = vr_design_kp(open->vr->r_a, sys.grid.v_g, sys.conv.kappa, sys.grid.omega_1);
    const fs::path dir = output_dir(o, cfg);
    auto f = open_out(dir / "design.csv");
    f << "scr,k_p,max_real,stable\n";
    bool all_stable = true;
    for (const auto& v : values) {
        RunConfig c = with_scr(cfg, parse_value(v));
        c.scenario.scheme.psc.k_p = k_p;
        const ModalSummary m = modal_summary(c);
        all_stable = all_stable && m.stable();
        f << v << ',' << num(k_p) << ',' << num(m.max_real) << ',' << (m.stable() ? "yes" : "no") << '\n';
    }
    auto r = open_out(dir / "report.txt");
    r << "k_p: " << num(k_p) << '\n' << "all_stable: " << (all_stable ? "yes" : "no") << '\n';
    out << "design k_p = " << num(k_p) << " rad/s, " << (all_stable ? "stable" : "unstable") << " on all grids\n";
    return o.expect_stable && !all_stable ? kExitUnstable : kExitOk;
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_flag("--expect-stable", o.expect_stable, "Exit 3 when a poorly damped resonance is found");
    cmd->add_flag("--dump-config", o.dump, "Print the canonical configuration and exit");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-frequency resonance lab for grid-forming converters"};
    app.name("gfmlab");
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "Simulate the scenario and classify the ringdown");
    add_common(run, o);
    auto* modes = app.add_subcommand("modes", "Eigenvalues of the linearized closed loop");
    add_common(modes, o);
    auto* bode = app.add_subcommand("bode", "Frequency response of one input/output channel");
    add_common(bode, o);
    bode->add_option("--input", o.input, "Input label")->required();
    bode->add_option("--output", o.output, "Output label")->required();
    bode->add_option("--loop", o.loop, "closed | outer_open | frozen");
    bode->add_option("--fmin", o.fmin, "Lowest frequency (Hz)");
    bode->add_option("--fmax", o.fmax, "Highest frequency (Hz)");
    bode->add_option("--points", o.points, "Number of frequencies");
    auto* sweep = app.add_subcommand("sweep", "Run and linearize across grid strengths");
    add_common(sweep, o);
    sweep->add_option("--param", o.param, "Swept parameter (scr)");
    sweep->add_option("--values", o.values, "Comma-separated values")->delimiter(',')->required();
    auto* design = app.add_subcommand("design-check", "Check the matched droop gain across grid strengths");
    add_common(design, o);
    design->add_option("--values", o.values, "SCR values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream cli_out;
        std::ostringstream cli_err;
        const int code = app.exit(e, cli_out, cli_err);
        out << cli_out.str();
        if (code == 0) return kExitOk;
        std::string line = cli_err.str();
        if (line.empty()) line = e.what();
        err << "gfmlab: " << line.substr(0, line.find('\n')) << '\n';
        return kExitConfig;
    }

    try {
        const RunConfig cfg = load_config(o.config);
        if (o.dump) {
            out << dump_config(cfg);
            return kExitOk;
        }
        if (run->parsed()) return cmd_run(o, cfg, out);
        if (modes->parsed()) return cmd_modes(o, cfg, out);
        if (bode->parsed()) return cmd_bode(o, cfg, out);
        if (sweep->parsed()) return cmd_sweep(o, cfg, out, err);
        return cmd_design_check(o, cfg, out);
    } catch (const ConfigError& e) {
        err << "gfmlab: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParameterDomainError& e) {
        err << "gfmlab: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const VariantMismatch& e) {
        err << "gfmlab: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        err << "gfmlab: numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "gfmlab: analysis failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "gfmlab: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace gfmlab
