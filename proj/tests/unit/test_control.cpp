#include <doctest.h>

#include <vector>

#include "gen.hpp"
#include "gfmlab/control.hpp"
#include "gfmlab/errors.hpp"

using namespace gfmlab;

TEST_CASE("pure droop maps the power error to frequency") {
    PscConfig cfg;
    cfg.k_p = 15.7;
    const PscOutput out = psc_step(cfg, {}, {}, 0.2, 0.5, 0.0, 314.0);
    CHECK(out.omega == doctest::Approx(314.0 + 15.7 * 0.3));
    CHECK(out.dtheta_dt == doctest::Approx(15.7 * 0.3));
}

TEST_CASE("droop LPF state relaxes toward the power error") {
    PscConfig cfg;
    cfg.filter = DroopLpf{31.4};
    std::vector<double> x{0.1}, dx(1);
    const PscOutput out = psc_step(cfg, x, dx, 0.0, 0.5, 0.0, 314.0);
    CHECK(dx[0] == doctest::Approx(31.4 * (0.5 - 0.1)));
    CHECK(out.dtheta_dt == doctest::Approx(cfg.k_p * 0.1));
}

TEST_CASE("lead-lag with equal time constants acts like the plain LPF") {
    PscConfig lag;
    lag.filter = LeadLag{31.4, 0.02, 0.02};
    PscConfig lpf;
    lpf.filter = DroopLpf{31.4};
    std::vector<double> x{0.3, -0.2}, dx(2), y{0.3}, dy(1);
    const PscOutput a = psc_step(lag, x, dx, 0.1, 0.4, 0.0, 314.0);
    const PscOutput b = psc_step(lpf, y, dy, 0.1, 0.4, 0.0, 314.0);
    CHECK(a.omega == doctest::Approx(b.omega));
    CHECK(dx[0] == doctest::Approx(dy[0]));
}

TEST_CASE("hybrid synchronization adds the v_q feedforward") {
    PscConfig cfg;
    cfg.k_vq = 157.0;
    const PscOutput out = psc_step(cfg, {}, {}, 0.5, 0.5, 0.01, 314.0);
    CHECK(out.dtheta_dt == doctest::Approx(1.57));
}

TEST_CASE("controller state size must match the variant") {
    PscConfig cfg;
    cfg.filter = DroopLpf{};
    std::vector<double> x(2), dx(2);
    CHECK_THROWS_AS(psc_step(cfg, x, dx, 0.0, 0.0, 0.0, 314.0), VariantMismatch);
    OuterVoltageConfig outer;
    outer.avc = PiGains{0.5, 20.0};
    CHECK_THROWS_AS(outer_voltage_step(outer, {}, {}, 0.0, 0.0, 1.0, 1.0), VariantMismatch);
}

TEST_CASE("outer voltage loop: RPC droop plus AVC") {
    OuterVoltageConfig cfg;
    cfg.k_q = 0.02;
    CHECK(outer_voltage_step(cfg, {}, {}, 0.5, 0.0, 1.0, 1.0) == doctest::Approx(1.0 - 0.01));
    cfg.avc = PiGains{0.5, 20.0};
    std::vector<double> x{0.03}, dx(1);
    const double e = outer_voltage_step(cfg, x, dx, 0.0, 0.0, 0.98, 1.0);
    CHECK(e == doctest::Approx(1.0 + 0.5 * 0.02 + 0.03));
    CHECK(dx[0] == doctest::Approx(20.0 * 0.02));
}

TEST_CASE("active susceptance feedback is -B_a v_q") {
    Gen g(11);
    for (int k = 0; k < 100; ++k) {
        const double b = g.uniform(0.0, 3.0);
        const double vq = g.uniform(-0.5, 0.5);
        CHECK(as_feedback(b, vq) == -b * vq);
    }
}

TEST_CASE("PLL integrates v_q") {
    PllGains pll;
    std::vector<double> x{0.5}, dx(1);
    const PllOutput out = pll_step(pll, x, dx, 0.01, 314.0);
    CHECK(dx[0] == doctest::Approx(pll.k_i * 0.01));
    CHECK(out.omega == doctest::Approx(314.0 + pll.k_p * 0.01 + 0.5));
}

TEST_CASE("default current-loop gains follow the filter") {
    const SystemParams sys = default_system();
    const PiGains vcc = default_vcc_gains(sys);
    const double alpha = kTwoPi * 500.0;
    CHECK(vcc.k_p == doctest::Approx(alpha * sys.conv.l_f / sys.grid.omega_1));
    CHECK(vcc.k_i == doctest::Approx(alpha * sys.conv.r_f));
}

TEST_CASE("open-loop reference generator without add-ons passes E through") {
    OpenLoopVvc cfg;
    InnerInputs in;
    in.e_mag = 1.03;
    in.i_f = {0.4, -0.1};
    const InnerOutput out = open_loop_inner_step(cfg, {}, {}, in, 1.0);
    CHECK(out.e_cmd.real() == doctest::Approx(1.03));
    CHECK(out.e_cmd.imag() == doctest::Approx(0.0));
}

TEST_CASE("inner state labels match the configured variant") {
    const SystemParams sys = default_system();
    ClosedLoopVvc c = default_closed_loop(sys);
    const auto base = inner_state_labels(c);
    c.add_on = ViAddOn{};
    CHECK(inner_state_labels(c).size() == base.size() + 2);
    c.v_ff_bandwidth = 0.0;
    CHECK(inner_state_labels(c).size() == base.size());
    OpenLoopVvc open;
    CHECK(inner_state_labels(open).empty());
    open.vr = VrConfig{};
    CHECK(inner_state_labels(open).size() == 2);
}

TEST_CASE("scheme validation") {
    ControlScheme s;
    s.psc.k_p = -1.0;
    CHECK_THROWS_AS(s.validate(), ParameterDomainError);
    s = ControlScheme{};
    OpenLoopVvc open;
    open.prf = PrfConfig{};
    s.inner = open;
    CHECK_THROWS_AS(s.validate(), ParameterDomainError);
    s = ControlScheme{};
    s.omega_meas = 0.0;
    CHECK_THROWS_AS(s.validate(), ParameterDomainError);
}

TEST_CASE("virtual resistance acts only on current changes") {
    Gen g(12);
    OpenLoopVvc cfg;
    cfg.vr = VrConfig{0.2, kTwoPi * 7.5};
    for (int k = 0; k < 50; ++k) {
        InnerInputs in;
        in.e_mag = g.uniform(0.9, 1.1);
        in.i_f = g.phasor(1.0);
        // high-pass state settled on the current: no voltage drop
        std::vector<double> x{in.i_f.real(), in.i_f.imag()}, dx(2);
        const InnerOutput settled = open_loop_inner_step(cfg, x, dx, in, 1.0);
        CHECK(std::abs(settled.e_cmd - ComplexDq{in.e_mag, 0.0}) < 1e-12);
        CHECK(std::abs(dx[0]) + std::abs(dx[1]) < 1e-12);
        // a fresh current step drops r_a times the step
        std::vector<double> zero{0.0, 0.0};
        const InnerOutput step = open_loop_inner_step(cfg, zero, dx, in, 1.0);
        CHECK(std::abs(step.e_cmd - (ComplexDq{in.e_mag, 0.0} - 0.2 * in.i_f)) < 1e-12);
    }
}
