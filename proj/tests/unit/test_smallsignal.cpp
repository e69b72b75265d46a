#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gen.hpp"
#include "gfmlab/errors.hpp"
#include "gfmlab/pdc.hpp"
#include "gfmlab/smallsignal.hpp"

using namespace gfmlab;

namespace {

SystemParams random_system(Gen& g) {
    SystemParams sys = default_system(g.log_uniform(3.0, 30.0), g.log_uniform(2.0, 50.0));
    sys.conv.r_f = g.uniform(0.002, 0.02);
    return sys;
}

}  // namespace

TEST_CASE("equilibrium delivers the power reference") {
    Gen g(31);
    for (int k = 0; k < 25; ++k) {
        const SystemParams sys = random_system(g);
        ControlScheme scheme;
        scheme.psc.k_p = g.uniform(0.01, 0.05) * 314.0;
        const References refs{g.uniform(0.0, 0.8), g.uniform(-0.1, 0.1), 1.0};
        const PreparedModel pm = prepare_model(sys, scheme, refs);
        CHECK(pm.model.derivatives(pm.op.x0, pm.op.u0).norm() < 1e-8);
        CHECK(pm.op.p0 == doctest::Approx(refs.p_ref).epsilon(1e-6));
        const Eigen::VectorXd y = pm.model.outputs(pm.op.x0, pm.op.u0);
        CHECK(y(ConverterModel::output_index("P")) == doctest::Approx(refs.p_ref).epsilon(1e-6));
        // no angle drift at equilibrium
        CHECK(y(ConverterModel::output_index("omega")) == doctest::Approx(sys.grid.omega_1));
    }
}

TEST_CASE("frozen capacitor-free model has the series RL poles") {
    Gen g(32);
    for (int k = 0; k < 30; ++k) {
        SystemParams sys = random_system(g);
        sys.conv.c_f = 0.0;
        const PreparedModel pm = prepare_model(sys, ControlScheme{}, References{0.3, 0.0, 1.0}, LoopMode::Frozen);
        const auto modes = eigenmodes(linearize(pm.model, pm.op));
        REQUIRE(modes.size() == 2);
        const double w = sys.grid.omega_1;
        const double r = sys.conv.r_f + sys.grid.r_g;
        const double l = (sys.conv.l_f + sys.grid.x_g) / w;
        const auto expected = plant_poles(r, l, w);
        CHECK(expected[0].real() == doctest::Approx(-r / l));
        for (const auto& m : modes) {
            const double err = std::min(std::abs(m.eigenvalue - expected[0]), std::abs(m.eigenvalue - expected[1]));
            CHECK(err < 1e-4 * w);
        }
    }
}

TEST_CASE("linearization of the linear circuit is exact") {
    Gen g(33);
    for (int k = 0; k < 10; ++k) {
        const SystemParams sys = random_system(g);
        const PreparedModel pm = prepare_model(sys, ControlScheme{}, References{0.5, 0.0, 1.0}, LoopMode::Frozen);
        const LinearModel lin = linearize(pm.model, pm.op);
        Eigen::VectorXd dx(lin.a.rows());
        for (int j = 0; j < dx.size(); ++j) dx(j) = g.uniform(-0.1, 0.1);
        const Eigen::VectorXd f = pm.model.derivatives(pm.op.x0 + dx, pm.op.u0);
        CHECK((f - lin.a * dx).norm() <= 1e-5 * std::max(1.0, f.norm()));
    }
}

TEST_CASE("linearize rejects off-equilibrium points and unknown labels") {
    const PreparedModel pm = prepare_model(default_system(), ControlScheme{}, References{0.5, 0.0, 1.0});
    OperatingPoint off = pm.op;
    off.x0(0) += 0.1;
    CHECK_THROWS_AS(linearize(pm.model, off), NotAnEquilibrium);
    CHECK_THROWS_AS(linearize(pm.model, pm.op, {"nope"}), ConfigError);
    CHECK_THROWS_AS(linearize(pm.model, pm.op, {}, {"nope"}), ConfigError);
    const LinearModel lin = linearize(pm.model, pm.op, {"p_ref"}, {"P"});
    CHECK(lin.b.cols() == 1);
    CHECK(lin.c.rows() == 1);
    // unit power-reference step: P follows with unity DC gain
    const auto h = freq_response(lin, "p_ref", "P", {1e-3});
    CHECK(std::abs(h[0]) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("mode damping and ordering") {
    Gen g(34);
    const SystemParams sys = random_system(g);
    const PreparedModel pm = prepare_model(sys, ControlScheme{}, References{0.4, 0.0, 1.0});
    const auto modes = eigenmodes(linearize(pm.model, pm.op));
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const auto& m = modes[k];
        CHECK(m.freq_hz == doctest::Approx(std::abs(m.eigenvalue.imag()) / kTwoPi));
        if (std::abs(m.eigenvalue) > 0.0) CHECK(m.zeta == doctest::Approx(-m.eigenvalue.real() / std::abs(m.eigenvalue)));
        if (k > 0) CHECK(modes[k - 1].freq_hz <= m.freq_hz + 1e-12);
    }
}

TEST_CASE("least damped picks the lowest damping in the band") {
    std::vector<Mode> modes(4);
    modes[0].freq_hz = 5.0, modes[0].zeta = 0.05;
    modes[1].freq_hz = 10.0, modes[1].zeta = 0.2;
    modes[2].freq_hz = 12.0, modes[2].zeta = 0.1;
    modes[3].freq_hz = 50.0, modes[3].zeta = 0.01;
    const Mode* m = least_damped(modes, 8.0, 25.0);
    REQUIRE(m != nullptr);
    CHECK(m->freq_hz == 12.0);
    CHECK(least_damped(modes, 20.0, 40.0) == nullptr);
}

TEST_CASE("log grid spans its ends with a constant ratio") {
    Gen g(35);
    for (int k = 0; k < 50; ++k) {
        const double lo = g.log_uniform(0.01, 10.0);
        const double hi = lo * g.log_uniform(1.5, 1e4);
        const int n = g.integer(2, 300);
        const auto w = log_grid(lo, hi, n);
        REQUIRE(static_cast<int>(w.size()) == n);
        CHECK(w.front() == doctest::Approx(lo));
        CHECK(w.back() == doctest::Approx(hi));
        for (int j = 2; j < n; ++j) CHECK(w[j] / w[j - 1] == doctest::Approx(w[1] / w[0]));
    }
}

TEST_CASE("droop LPF damping formula tracks the eigenvalues on a lossless stiff link") {
    for (double kp_pu : {0.02, 0.05}) {
        SystemParams sys = default_system(20.0, kInfiniteRatio);
        sys.conv.c_f = 0.0;
        sys.conv.r_f = 0.0;
        ControlScheme scheme;
        scheme.psc.k_p = kp_pu * 314.0;
        scheme.psc.filter = DroopLpf{31.4};
        const PreparedModel pm = prepare_model(sys, scheme, References{0.5, 0.0, 1.0});
        const auto modes = eigenmodes(linearize(pm.model, pm.op));
        const Mode* m = least_damped(modes, 1.0, 25.0);
        REQUIRE(m != nullptr);
        const SecondOrder so = psc_second_order(scheme.psc.k_p, 31.4, sys.grid.x_g + sys.conv.l_f, 1.0, pm.op.e0);
        CHECK(m->zeta == doctest::Approx(so.zeta).epsilon(0.1));
        CHECK(m->freq_hz == doctest::Approx(so.damped_hz()).epsilon(0.1));
    }
}

TEST_CASE("droop pole estimate and gain limit agree") {
    Gen g(36);
    for (int k = 0; k < 100; ++k) {
        const double r = g.uniform(0.0, 0.1);
        const double l = g.uniform(0.05, 0.5) / 314.0;
        const double limit = droop_gain_limit(r);
        // at the limit the estimated real part is zero
        const auto at = droop_pole_estimate(r, l, limit * 314.0, 1.0, 1.0, 1.0, 314.0);
        CHECK(std::abs(at[0].real()) < 1e-9 * (1.0 + r / l));
        const auto none = droop_pole_estimate(r, l, 0.0, 1.0, 1.0, 1.0, 314.0);
        CHECK(none[0] == plant_poles(r, l, 314.0)[0]);
    }
    CHECK(vr_design_kp(0.2, 1.0, 1.0, 314.0) == doctest::Approx(62.8));
    CHECK_THROWS_AS(vr_design_kp(0.0, 1.0, 1.0, 314.0), ParameterDomainError);
}

TEST_CASE("virtual-resistance poles solve their characteristic equation") {
    Gen g(37);
    for (int k = 0; k < 50; ++k) {
        const double w = 314.0;
        const double r = g.uniform(0.0, 0.05), l = g.uniform(0.05, 0.5) / w;
        const double ra = g.uniform(0.0, 0.5), wv = g.uniform(5.0, 100.0);
        const VrPoles p = vr_mode_poles(r, l, ra, wv, w);
        REQUIRE(p.all.size() == 4);
        for (const auto& s : p.all) {
            const auto z = s * l + r + ra * s / (s + wv);
            const auto residual = z * z + (w * l) * (w * l);
            CHECK(std::abs(residual) < 1e-6 * std::max(1.0, std::norm(z)));
        }
    }
}

TEST_CASE("power decoupling injections are stable") {
    Gen g(38);
    for (int k = 0; k < 8; ++k) {
        const SystemParams sys = random_system(g);
        ControlScheme scheme;
        OpenLoopVvc inner;
        inner.vr = VrConfig{};
        inner.pdc = PdcConfig{sys.grid.r_g * g.uniform(0.8, 1.2), sys.grid.x_g * g.uniform(0.8, 1.2), g.coin()};
        scheme.inner = inner;
        const PreparedModel pm = prepare_model(sys, scheme, References{0.5, 0.0, 1.0});
        REQUIRE(pm.pdc.has_value());
        for (const auto* ss : {&pm.pdc->injection.theta_from_e, &pm.pdc->injection.e_from_theta}) {
            if (ss->order() == 0) continue;
            const Eigen::VectorXcd ev = ss->a.eigenvalues();
            for (int j = 0; j < ev.size(); ++j) CHECK(ev(j).real() < 0.0);
        }
    }
}
