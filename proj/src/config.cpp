#include "gfmlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "gfmlab/errors.hpp"

namespace gfmlab {

namespace {

// Accepted unit suffixes per quantity kind. The first one is the canonical unit.
enum class Kind {
    Plain,        // dimensionless, optional "pu"
    Resistance,   // pu | ohm
    Reactance,    // pu | ohm | mH
    Susceptance,  // pu | uF
    Rate,         // rad_s | hz
    Hertz,        // hz | rad_s, stored in Hz
    DroopGain,    // rad_s | pu (multiples of the base frequency)
    Time,         // s | ms | us
    Voltage,      // V | kV
    Power,        // W | kW
};

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Section {
    int line = 0;
    std::map<std::string, Entry> keys;
    std::vector<Entry> events;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* on_off(bool b) { return b ? "on" : "off"; }

class Reader {
public:
    Reader(std::istream& in, std::string source) : source_(std::move(source)) { read(in); }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

    bool has(const std::string& sec, const std::string& key) const {
        const auto s = sections_.find(sec);
        return s != sections_.end() && s->second.keys.count(key) > 0;
    }

    Entry* entry(const std::string& sec, const std::string& key) {
        const auto s = sections_.find(sec);
        if (s == sections_.end()) return nullptr;
        const auto k = s->second.keys.find(key);
        if (k == s->second.keys.end()) return nullptr;
        k->second.used = true;
        return &k->second;
    }

    std::vector<Entry>& events() { return sections_["scenario"].events; }

    double number(const std::string& text, int line) const {
        double v = 0.0;
        const char* first = text.data();
        const char* last = first + text.size();
        if (!text.empty() && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || std::isnan(v)) fail(line, "not a number: '" + text + "'");
        return v;
    }

    double quantity(const Entry& e, Kind kind, double omega_base) const {
        const auto t = tokens(e.value);
        if (t.empty() || t.size() > 2) fail(e.line, "expected '<number> [unit]', got '" + e.value + "'");
        const double v = number(t[0], e.line);
        const std::string unit = t.size() == 2 ? t[1] : "";
        auto bad = [&](const char* allowed) -> double {
            fail(e.line, "unit '" + unit + "' not accepted here (use " + allowed + ")");
        };
        switch (kind) {
            case Kind::Plain:
                if (unit.empty() || unit == "pu") return v;
                return bad("no unit or pu");
            case Kind::Resistance:
                if (unit == "pu") return v;
                if (unit == "ohm") return base_->pu_from_ohm(v);
                return bad("pu or ohm");
            case Kind::Reactance:
                if (unit == "pu") return v;
                if (unit == "ohm") return base_->pu_from_ohm(v);
                if (unit == "mH") return base_->reactance_from_henry(v * 1e-3);
                return bad("pu, ohm or mH");
            case Kind::Susceptance:
                if (unit == "pu") return v;
                if (unit == "uF") return base_->susceptance_from_farad(v * 1e-6);
                return bad("pu or uF");
            case Kind::Rate:
                if (unit == "rad_s") return v;
                if (unit == "hz") return kTwoPi * v;
                return bad("rad_s or hz");
            case Kind::Hertz:
                if (unit == "hz") return v;
                if (unit == "rad_s") return v / kTwoPi;
                return bad("hz or rad_s");
            case Kind::DroopGain:
                if (unit == "rad_s") return v;
                if (unit == "pu") return v * omega_base;
                return bad("rad_s or pu");
            case Kind::Time:
                if (unit == "s") return v;
                if (unit == "ms") return v * 1e-3;
                if (unit == "us") return v * 1e-6;
                return bad("s, ms or us");
            case Kind::Voltage:
                if (unit == "V") return v;
                if (unit == "kV") return v * 1e3;
                return bad("V or kV");
            case Kind::Power:
                if (unit == "W") return v;
                if (unit == "kW") return v * 1e3;
                return bad("W or kW");
        }
        return v;
    }

    std::optional<double> get(const std::string& sec, const std::string& key, Kind kind = Kind::Plain) {
        const Entry* e = entry(sec, key);
        if (!e) return std::nullopt;
        return quantity(*e, kind, base_ ? base_->omega_base() : 0.0);
    }

    double get_or(const std::string& sec, const std::string& key, double fallback, Kind kind = Kind::Plain) {
        return get(sec, key, kind).value_or(fallback);
    }

    std::optional<std::string> word(const std::string& sec, const std::string& key) {
        const Entry* e = entry(sec, key);
        if (!e) return std::nullopt;
        return e->value;
    }

    std::string choice(const std::string& sec, const std::string& key, const std::vector<std::string>& allowed) {
        const Entry* e = entry(sec, key);
        if (!e) return allowed.front();
        for (const auto& a : allowed) {
            if (e->value == a) return a;
        }
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
        fail(e->line, key + " must be one of " + list + ", got '" + e->value + "'");
    }

    bool flag(const std::string& sec, const std::string& key, bool fallback) {
        if (!has(sec, key)) return fallback;
        return choice(sec, key, {"on", "off"}) == "on";
    }

    void set_base(const PerUnitBase& b) { base_ = b; }

    /// Any key nobody asked for is either unknown or does not apply to the chosen variants.
    void reject_unused() const {
        for (const auto& [name, sec] : sections_) {
            for (const auto& [key, e] : sec.keys) {
                if (!e.used) fail(e.line, "unknown or inapplicable key '" + key + "' in [" + name + "]");
            }
        }
    }

private:
    void read(std::istream& in) {
        static const std::vector<std::string> known = {"base",     "grid",     "converter", "control",
                                                       "scenario", "analysis", "output"};
        std::string raw;
        std::string current;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (text.empty()) continue;
            if (text.front() == '[') {
                if (text.back() != ']') fail(line, "malformed section header");
                current = trim(text.substr(1, text.size() - 2));
                if (std::find(known.begin(), known.end(), current) == known.end())
                    fail(line, "unknown section [" + current + "]");
                if (sections_.count(current) && sections_[current].line) fail(line, "duplicate section [" + current + "]");
                sections_[current].line = line;
                continue;
            }
            if (current.empty()) fail(line, "key outside a section");
            const auto eq = text.find('=');
            if (eq == std::string::npos) fail(line, "expected 'key = value'");
            const std::string key = trim(text.substr(0, eq));
            const std::string value = trim(text.substr(eq + 1));
            if (key.empty() || value.empty()) fail(line, "empty key or value");
            Section& sec = sections_[current];
            if (current == "scenario" && key == "event") {
                sec.events.push_back({value, line, true});
                continue;
            }
            if (sec.keys.count(key)) fail(line, "duplicate key '" + key + "'");
            sec.keys[key] = {value, line, false};
        }
    }

    std::string source_;
    std::map<std::string, Section> sections_;
    std::optional<PerUnitBase> base_;
};

PscConfig read_psc(Reader& r, double omega_base) {
    PscConfig psc;
    psc.k_p = r.get_or("control", "psc_kp", 0.05 * omega_base, Kind::DroopGain);
    const std::string kind = r.choice("control", "psc", {"droop", "droop_lpf", "lead_lag"});
    if (kind == "droop_lpf") {
        psc.filter = DroopLpf{r.get_or("control", "psc_wc", DroopLpf{}.omega_c, Kind::Rate)};
    } else if (kind == "lead_lag") {
        LeadLag ll;
        ll.omega_c = r.get_or("control", "psc_wc", ll.omega_c, Kind::Rate);
        ll.t_lead = r.get_or("control", "psc_t_lead", 0.0, Kind::Time);
        ll.t_lag = r.get_or("control", "psc_t_lag", 0.0, Kind::Time);
        psc.filter = ll;
    }
    psc.k_vq = r.get("control", "hsc_kvq", Kind::DroopGain);
    return psc;
}

OuterVoltageConfig read_outer(Reader& r) {
    OuterVoltageConfig outer;
    outer.k_q = r.get_or("control", "rpc_kq", outer.k_q);
    outer.e_nom = r.get_or("control", "e_nom", outer.e_nom);
    if (r.flag("control", "avc", false)) {
        outer.avc = PiGains{r.get_or("control", "avc_kp", 0.5), r.get_or("control", "avc_ki", 20.0)};
    }
    return outer;
}

OpenLoopVvc read_open_loop(Reader& r) {
    OpenLoopVvc open;
    if (r.flag("control", "vr", false)) {
        VrConfig vr;
        vr.r_a = r.get_or("control", "vr_ra", vr.r_a, Kind::Resistance);
        vr.omega_v = r.get_or("control", "vr_hpf", vr.omega_v, Kind::Rate);
        open.vr = vr;
    }
    if (r.flag("control", "prf", false)) {
        open.prf = PrfConfig{r.get_or("control", "prf_ra", PrfConfig{}.r_a, Kind::Resistance)};
    }
    if (r.flag("control", "pdc", false)) {
        PdcConfig pdc;
        pdc.r_g_hat = r.get_or("control", "pdc_rg", pdc.r_g_hat, Kind::Resistance);
        pdc.x_g_hat = r.get_or("control", "pdc_xg", pdc.x_g_hat, Kind::Reactance);
        pdc.include_filter_and_vr = r.flag("control", "pdc_filter", pdc.include_filter_and_vr);
        open.pdc = pdc;
    }
    return open;
}

ClosedLoopVvc read_closed_loop(Reader& r, const SystemParams& sys) {
    ClosedLoopVvc c = default_closed_loop(sys);
    c.vvc.k_p = r.get_or("control", "vvc_kp", c.vvc.k_p);
    c.vvc.k_i = r.get_or("control", "vvc_ki", c.vvc.k_i);
    c.vcc.k_p = r.get_or("control", "vcc_kp", c.vcc.k_p);
    c.vcc.k_i = r.get_or("control", "vcc_ki", c.vcc.k_i);
    c.cap_decoupling = r.flag("control", "cap_decoupling", c.cap_decoupling);
    c.ind_decoupling = r.flag("control", "ind_decoupling", c.ind_decoupling);
    c.ig_feedforward = r.flag("control", "ig_feedforward", c.ig_feedforward);
    c.v_ff_bandwidth = r.get_or("control", "vff_bw", c.v_ff_bandwidth, Kind::Rate);

    const std::string add_on = r.choice("control", "add_on", {"none", "vi", "va", "hybrid", "as", "gfm_vcc"});
    auto read_va = [&] {
        VaAddOn va;
        va.r_v = r.get_or("control", "rv", va.r_v, Kind::Resistance);
        va.l_v = r.get_or("control", "lv", va.l_v, Kind::Reactance);
        return va;
    };
    if (add_on == "vi") {
        ViAddOn vi;
        vi.r_v = r.get_or("control", "rv", vi.r_v, Kind::Resistance);
        vi.l_v = r.get_or("control", "lv", vi.l_v, Kind::Reactance);
        vi.omega_lpf = r.get_or("control", "vi_lpf", vi.omega_lpf, Kind::Rate);
        c.add_on = vi;
    } else if (add_on == "va") {
        c.add_on = read_va();
    } else if (add_on == "hybrid") {
        HybridAddOn h;
        h.k_i_dq = r.get_or("control", "kidq", h.k_i_dq);
        h.prf = r.flag("control", "add_on_prf", h.prf);
        c.add_on = h;
    } else if (add_on == "as") {
        ActiveSusceptanceAddOn as;
        as.b_a = r.get_or("control", "ba", as.b_a);
        as.k_i_dq = r.get_or("control", "kidq", as.k_i_dq);
        as.prf = r.flag("control", "add_on_prf", as.prf);
        c.add_on = as;
    } else if (add_on == "gfm_vcc") {
        GfmVccAddOn g;
        g.va = read_va();
        g.pll.k_p = r.get_or("control", "pll_kp", g.pll.k_p);
        g.pll.k_i = r.get_or("control", "pll_ki", g.pll.k_i);
        g.prf = r.flag("control", "add_on_prf", g.prf);
        c.add_on = g;
    }
    return c;
}

GridParams read_grid(Reader& r, double omega_1) {
    const double v_g = r.get_or("grid", "v_g", 1.0);
    const bool by_scr = r.has("grid", "scr") || r.has("grid", "x_over_r");
    const bool by_z = r.has("grid", "r_g") || r.has("grid", "x_g");
    if (by_scr && by_z) {
        r.fail(r.entry("grid", r.has("grid", "r_g") ? "r_g" : "x_g")->line,
               "give the grid either as scr/x_over_r or as r_g/x_g");
    }
    if (by_z) {
        GridParams g;
        g.r_g = r.get_or("grid", "r_g", 0.0, Kind::Resistance);
        g.x_g = r.get_or("grid", "x_g", g.x_g, Kind::Reactance);
        g.v_g = v_g;
        g.omega_1 = omega_1;
        g.validate();
        return g;
    }
    return make_grid_from_scr(r.get_or("grid", "scr", 20.0), r.get_or("grid", "x_over_r", 10.0), v_g, omega_1);
}

Event read_event(Reader& r, const Entry& e, const GridParams& grid) {
    const auto t = tokens(e.value);
    std::size_t k = 0;
    if (t.empty()) r.fail(e.line, "empty event");
    Event ev;
    ev.time = r.number(t[k++], e.line);
    if (k < t.size() && (t[k] == "s" || t[k] == "ms" || t[k] == "us")) {
        ev.time *= t[k] == "s" ? 1.0 : t[k] == "ms" ? 1e-3 : 1e-6;
        ++k;
    }
    if (k >= t.size()) r.fail(e.line, "event needs an action");
    const std::string action = t[k++];
    std::vector<double> args;
    for (; k < t.size(); ++k) args.push_back(r.number(t[k], e.line));
    auto expect = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi)
            r.fail(e.line, "wrong number of values for " + action);
    };
    if (action == "step_pref") {
        expect(1, 1);
        ev.action = StepPref{args[0]};
    } else if (action == "step_qref") {
        expect(1, 1);
        ev.action = StepQref{args[0]};
    } else if (action == "step_vref") {
        expect(1, 1);
        ev.action = StepVref{args[0]};
    } else if (action == "set_scr") {
        expect(1, 2);
        ev.action = SetGrid{make_grid_from_scr(args[0], args.size() > 1 ? args[1] : 10.0, grid.v_g, grid.omega_1)};
    } else if (action == "set_grid") {
        expect(2, 3);
        GridParams g = grid;
        g.r_g = args[0];
        g.x_g = args[1];
        if (args.size() > 2) g.v_g = args[2];
        if (!(g.r_g >= 0.0 && g.x_g >= 0.0 && g.r_g + g.x_g > 0.0))
            r.fail(e.line, "set_grid needs a positive impedance");
        ev.action = SetGrid{g};
    } else {
        r.fail(e.line, "unknown event action '" + action + "'");
    }
    return ev;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
    Reader r(in, source);
    RunConfig cfg;

    const PerUnitBase base(r.get_or("base", "voltage", 190.5, Kind::Voltage),
                           r.get_or("base", "power", 3000.0, Kind::Power),
                           r.get_or("base", "omega", 314.0, Kind::Rate));
    r.set_base(base);
    const double w = base.omega_base();

    SystemParams& sys = cfg.scenario.system;
    sys.base = base;
    sys.grid = read_grid(r, w);
    sys.conv.l_f = r.get_or("converter", "l_f", sys.conv.l_f, Kind::Reactance);
    sys.conv.c_f = r.get_or("converter", "c_f", sys.conv.c_f, Kind::Susceptance);
    sys.conv.r_f = r.get_or("converter", "r_f", sys.conv.r_f, Kind::Resistance);
    sys.conv.kappa = r.get_or("converter", "kappa", sys.conv.kappa);
    sys.conv.validate();

    ControlScheme& scheme = cfg.scenario.scheme;
    scheme.psc = read_psc(r, w);
    scheme.outer = read_outer(r);
    scheme.omega_meas = r.get_or("control", "meas_bw", scheme.omega_meas, Kind::Rate);
    if (r.choice("control", "inner", {"open_loop", "closed_loop"}) == "open_loop") {
        scheme.inner = read_open_loop(r);
    } else {
        scheme.inner = read_closed_loop(r, sys);
    }

    References& refs = cfg.scenario.refs;
    refs.p_ref = r.get_or("scenario", "p_ref", refs.p_ref);
    refs.q_ref = r.get_or("scenario", "q_ref", refs.q_ref);
    refs.v_ref = r.get_or("scenario", "v_ref", refs.v_ref);
    cfg.scenario.duration = r.get_or("scenario", "duration", cfg.scenario.duration, Kind::Time);
    cfg.sim.dt = r.get_or("scenario", "dt", cfg.sim.dt, Kind::Time);
    if (const Entry* e = r.entry("scenario", "decimation")) {
        const double d = r.number(e->value, e->line);
        if (d != std::floor(d) || d < 1.0 || d > 1e6) r.fail(e->line, "decimation must be a positive integer");
        cfg.sim.record_decimation = static_cast<int>(d);
    }
    for (const Entry& e : r.events()) cfg.scenario.events.push_back(read_event(r, e, sys.grid));

    ClassifyOptions& a = cfg.analysis;
    cfg.f1_hz = r.get_or("analysis", "f1", w / kTwoPi, Kind::Hertz);
    a.sr_lo = r.get_or("analysis", "sr_lo", a.sr_lo);
    a.sr_hi = r.get_or("analysis", "sr_hi", a.sr_hi);
    a.ssr_floor_hz = r.get_or("analysis", "ssr_floor", a.ssr_floor_hz, Kind::Hertz);
    a.ssr_hi = r.get_or("analysis", "ssr_hi", a.ssr_hi);
    a.nsr_hi = r.get_or("analysis", "nsr_hi", a.nsr_hi);
    a.zeta_max = r.get_or("analysis", "zeta_max", a.zeta_max);
    a.amplitude_floor = r.get_or("analysis", "amplitude_floor", a.amplitude_floor);
    if (!(a.sr_lo < a.sr_hi && a.ssr_hi < a.sr_lo && a.ssr_floor_hz >= 0.0 && a.zeta_max > 0.0 && cfg.f1_hz > 0.0))
        throw ConfigError(source + ": [analysis] bands are inconsistent");

    if (auto dir = r.word("output", "dir")) cfg.out_dir = *dir;

    r.reject_unused();
    scheme.validate();
    cfg.scenario.validate();
    cfg.sim.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream os;
    const SystemParams& sys = cfg.scenario.system;
    const ControlScheme& sc = cfg.scenario.scheme;
    auto kv = [&](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
    auto num = [&](const char* key, double v, const char* unit = "") {
        kv(key, fmt(v) + (*unit ? std::string(" ") + unit : ""));
    };

    os << "[base]\n";
    num("voltage", sys.base.v_base(), "V");
    num("power", sys.base.s_base(), "W");
    num("omega", sys.base.omega_base(), "rad_s");

    os << "\n[grid]\n";
    num("r_g", sys.grid.r_g, "pu");
    num("x_g", sys.grid.x_g, "pu");
    num("v_g", sys.grid.v_g);

    os << "\n[converter]\n";
    num("l_f", sys.conv.l_f, "pu");
    num("c_f", sys.conv.c_f, "pu");
    num("r_f", sys.conv.r_f, "pu");
    num("kappa", sys.conv.kappa);

    os << "\n[control]\n";
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PureDroop>) {
                kv("psc", "droop");
                num("psc_kp", sc.psc.k_p, "rad_s");
            } else if constexpr (std::is_same_v<F, DroopLpf>) {
                kv("psc", "droop_lpf");
                num("psc_kp", sc.psc.k_p, "rad_s");
                num("psc_wc", f.omega_c, "rad_s");
            } else {
                kv("psc", "lead_lag");
                num("psc_kp", sc.psc.k_p, "rad_s");
                num("psc_wc", f.omega_c, "rad_s");
                num("psc_t_lead", f.t_lead, "s");
                num("psc_t_lag", f.t_lag, "s");
            }
        },
        sc.psc.filter);
    if (sc.psc.k_vq) num("hsc_kvq", *sc.psc.k_vq, "rad_s");
    num("rpc_kq", sc.outer.k_q);
    num("e_nom", sc.outer.e_nom);
    kv("avc", on_off(sc.outer.avc.has_value()));
    if (sc.outer.avc) {
        num("avc_kp", sc.outer.avc->k_p);
        num("avc_ki", sc.outer.avc->k_i);
    }
    num("meas_bw", sc.omega_meas, "rad_s");

    if (const auto* open = std::get_if<OpenLoopVvc>(&sc.inner)) {
        kv("inner", "open_loop");
        kv("vr", on_off(open->vr.has_value()));
        if (open->vr) {
            num("vr_ra", open->vr->r_a, "pu");
            num("vr_hpf", open->vr->omega_v, "rad_s");
        }
        kv("prf", on_off(open->prf.has_value()));
        if (open->prf) num("prf_ra", open->prf->r_a, "pu");
        kv("pdc", on_off(open->pdc.has_value()));
        if (open->pdc) {
            num("pdc_rg", open->pdc->r_g_hat, "pu");
            num("pdc_xg", open->pdc->x_g_hat, "pu");
            kv("pdc_filter", on_off(open->pdc->include_filter_and_vr));
        }
    } else {
        const auto& c = std::get<ClosedLoopVvc>(sc.inner);
        kv("inner", "closed_loop");
        num("vvc_kp", c.vvc.k_p);
        num("vvc_ki", c.vvc.k_i);
        num("vcc_kp", c.vcc.k_p);
        num("vcc_ki", c.vcc.k_i);
        kv("cap_decoupling", on_off(c.cap_decoupling));
        kv("ind_decoupling", on_off(c.ind_decoupling));
        kv("ig_feedforward", on_off(c.ig_feedforward));
        num("vff_bw", c.v_ff_bandwidth, "rad_s");
        std::visit(
            [&](const auto& a) {
                using A = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<A, NoAddOn>) {
                    kv("add_on", "none");
                } else if constexpr (std::is_same_v<A, ViAddOn>) {
                    kv("add_on", "vi");
                    num("rv", a.r_v, "pu");
                    num("lv", a.l_v, "pu");
                    num("vi_lpf", a.omega_lpf, "rad_s");
                } else if constexpr (std::is_same_v<A, VaAddOn>) {
                    kv("add_on", "va");
                    num("rv", a.r_v, "pu");
                    num("lv", a.l_v, "pu");
                } else if constexpr (std::is_same_v<A, HybridAddOn>) {
                    kv("add_on", "hybrid");
                    num("kidq", a.k_i_dq);
                    kv("add_on_prf", on_off(a.prf));
                } else if constexpr (std::is_same_v<A, ActiveSusceptanceAddOn>) {
                    kv("add_on", "as");
                    num("ba", a.b_a);
                    num("kidq", a.k_i_dq);
                    kv("add_on_prf", on_off(a.prf));
                } else {
                    kv("add_on", "gfm_vcc");
                    num("rv", a.va.r_v, "pu");
                    num("lv", a.va.l_v, "pu");
                    num("pll_kp", a.pll.k_p);
                    num("pll_ki", a.pll.k_i);
                    kv("add_on_prf", on_off(a.prf));
                }
            },
            c.add_on);
    }

    os << "\n[scenario]\n";
    num("p_ref", cfg.scenario.refs.p_ref);
    num("q_ref", cfg.scenario.refs.q_ref);
    num("v_ref", cfg.scenario.refs.v_ref);
    num("duration", cfg.scenario.duration, "s");
    num("dt", cfg.sim.dt, "s");
    kv("decimation", std::to_string(cfg.sim.record_decimation));
    for (const Event& e : cfg.scenario.events) {
        std::string action = std::visit(
            [](const auto& a) -> std::string {
                using A = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<A, StepPref>) return "step_pref " + fmt(a.value);
                if constexpr (std::is_same_v<A, StepQref>) return "step_qref " + fmt(a.value);
                if constexpr (std::is_same_v<A, StepVref>) return "step_vref " + fmt(a.value);
                if constexpr (std::is_same_v<A, SetGrid>)
                    return "set_grid " + fmt(a.grid.r_g) + " " + fmt(a.grid.x_g) + " " + fmt(a.grid.v_g);
            },
            e.action);
        kv("event", fmt(e.time) + " s " + action);
    }

    const ClassifyOptions& a = cfg.analysis;
    os << "\n[analysis]\n";
    num("f1", cfg.f1_hz, "hz");
    num("sr_lo", a.sr_lo);
    num("sr_hi", a.sr_hi);
    num("ssr_floor", a.ssr_floor_hz, "hz");
    num("ssr_hi", a.ssr_hi);
    num("nsr_hi", a.nsr_hi);
    num("zeta_max", a.zeta_max);
    num("amplitude_floor", a.amplitude_floor);

    if (!cfg.out_dir.empty()) {
        os << "\n[output]\n";
        kv("dir", cfg.out_dir);
    }
    return os.str();
}

}  // namespace gfmlab
