#include <doctest.h>

#include <cmath>
#include <vector>

#include "gen.hpp"
#include "gfmlab/control.hpp"
#include "gfmlab/errors.hpp"
#include "gfmlab/ringdown.hpp"

using namespace gfmlab;

namespace {

constexpr double kFs = 2000.0;

std::vector<double> sample(double seconds, auto f) {
    std::vector<double> x(static_cast<std::size_t>(seconds * kFs));
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = f(static_cast<double>(k) / kFs);
    return x;
}

}  // namespace

TEST_CASE("spectrum locates a pure tone") {
    Gen g(41);
    for (int k = 0; k < 20; ++k) {
        const double f = g.uniform(3.0, 200.0), a = g.log_uniform(1e-3, 10.0);
        const auto x = sample(1.0, [&](double t) { return 0.3 + a * std::sin(kTwoPi * f * t + 0.4); });
        const auto peak = dominant_peak(estimate_spectrum(x, kFs), 1.0, 500.0);
        REQUIRE(peak.has_value());
        CHECK(std::abs(peak->freq_hz - f) <= 0.1);
        CHECK(peak->amplitude == doctest::Approx(a).epsilon(0.05));
    }
}

TEST_CASE("constant signal has no peak") {
    const auto x = sample(1.0, [](double) { return 0.7; });
    CHECK_FALSE(dominant_peak(estimate_spectrum(x, kFs), 1.0, 500.0).has_value());
}

TEST_CASE("two tones are resolved") {
    const auto x = sample(2.0, [](double t) { return std::sin(kTwoPi * 9.0 * t) + 0.5 * std::sin(kTwoPi * 50.0 * t); });
    const auto peaks = find_peaks(estimate_spectrum(x, kFs), 1.0, 100.0, 0.2);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0].freq_hz - 9.0) <= 0.2);
    CHECK(std::abs(peaks[1].freq_hz - 50.0) <= 0.2);
    CHECK(peaks[1].amplitude / peaks[0].amplitude == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("short segments are rejected") {
    const auto x = sample(0.15, [](double t) { return std::sin(kTwoPi * 10.0 * t); });
    CHECK_THROWS_AS(estimate_spectrum(x, kFs), InsufficientData);
}

TEST_CASE("pencil fit recovers a damped oscillation") {
    const auto x = sample(1.0, [](double t) { return std::exp(-5.0 * t) * std::cos(kTwoPi * 9.0 * t); });
    const FittedMode m = fit_ringdown(x, kFs);
    CHECK(m.freq_hz == doctest::Approx(9.0).epsilon(0.05 / 9.0));
    CHECK(std::abs(m.zeta - 5.0 / std::hypot(5.0, kTwoPi * 9.0)) <= 0.01);
    CHECK(m.amplitude == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("pencil fit of a decaying exponential is non-oscillatory") {
    const auto x = sample(1.0, [](double t) { return 2.0 * std::exp(-3.0 * t); });
    const FittedMode m = fit_ringdown(x, kFs);
    CHECK(m.freq_hz == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(m.pole.real() == doctest::Approx(-3.0).epsilon(0.01));
}

TEST_CASE("pencil fit of silence has no dominant mode") {
    const std::vector<double> x(2000, 0.0);
    CHECK_THROWS_AS(fit_ringdown(x, kFs), NoDominantMode);
}

TEST_CASE("frequency estimates do not depend on the signal scale") {
    Gen g(42);
    const auto base = sample(1.0, [](double t) { return std::exp(-2.0 * t) * std::sin(kTwoPi * 12.0 * t); });
    const FittedMode ref = fit_ringdown(base, kFs);
    const auto ref_peak = dominant_peak(estimate_spectrum(base, kFs), 1.0, 100.0);
    for (int k = 0; k < 10; ++k) {
        const double c = g.log_uniform(1e-4, 1e4);
        std::vector<double> x = base;
        for (double& v : x) v *= c;
        const FittedMode m = fit_ringdown(x, kFs);
        CHECK(m.freq_hz == doctest::Approx(ref.freq_hz).epsilon(1e-6));
        CHECK(m.zeta == doctest::Approx(ref.zeta).epsilon(1e-6));
        const auto peak = dominant_peak(estimate_spectrum(x, kFs), 1.0, 100.0);
        CHECK(peak->freq_hz == doctest::Approx(ref_peak->freq_hz).epsilon(1e-9));
    }
}

TEST_CASE("power bands partition the frequency axis") {
    Gen g(43);
    const double f1 = 50.0;
    for (int k = 0; k < 2000; ++k) {
        const double f = g.uniform(0.0, 150.0);
        const ResonanceClass c = band_of(f, f1, ChannelKind::Power);
        if (f >= 40.0 && f <= 55.0) CHECK(c == ResonanceClass::SR);
        else if (f >= 1.0 && f <= 25.0) CHECK(c == ResonanceClass::SSR);
        else CHECK(c == ResonanceClass::None);
    }
}

TEST_CASE("current bands follow the dq image") {
    Gen g(44);
    const double f1 = 50.0;
    for (int k = 0; k < 2000; ++k) {
        const double f = g.uniform(0.0, 150.0);
        const double dq = std::abs(f - f1);
        const ResonanceClass c = band_of(f, f1, ChannelKind::Current);
        if (dq >= 40.0 && dq <= 55.0) CHECK(c == ResonanceClass::SR);
        else if (f > f1 && f < 2.0 * f1) CHECK(c == ResonanceClass::NSR);
        else if (f < f1 && dq >= 1.0 && dq <= 25.0) CHECK(c == ResonanceClass::SSR);
        else CHECK(c == ResonanceClass::None);
    }
}

TEST_CASE("classification applies damping and amplitude limits") {
    const SpectralPeak peak{9.0, 0.1};
    FittedMode mode;
    mode.freq_hz = 9.0;
    mode.zeta = 0.1;
    auto r = classify_resonance(peak, mode, 0.05, 50.0, ChannelKind::Power, "P");
    CHECK(r.cls == ResonanceClass::SSR);
    CHECK(r.channel == "P");
    mode.zeta = 0.6;
    CHECK(classify_resonance(peak, mode, 0.05, 50.0, ChannelKind::Power, "P").cls == ResonanceClass::None);
    mode.zeta = 0.1;
    CHECK(classify_resonance(SpectralPeak{9.0, 1e-5}, mode, 0.05, 50.0, ChannelKind::Power, "P").cls ==
          ResonanceClass::None);
    CHECK(classify_resonance(std::nullopt, std::nullopt, 0.05, 50.0, ChannelKind::Power, "P").cls ==
          ResonanceClass::None);
}

TEST_CASE("a dq oscillation appears as two stationary-frame components") {
    const double f1 = 50.0, f_ssr = 10.0;
    const auto id = sample(2.0, [&](double t) { return 0.1 * std::cos(kTwoPi * f_ssr * t); });
    const auto iq = sample(2.0, [&](double t) { return 0.05 * std::sin(kTwoPi * f_ssr * t + 0.3); });
    const CouplingResult c = coupling_check(id, iq, kFs, f_ssr, f1);
    CHECK(c.pass);
    CHECK(std::abs(c.f_lower - 40.0) <= 0.2);
    CHECK(std::abs(c.f_upper - 60.0) <= 0.2);
    CHECK(c.a_lower > 0.1 * c.a_dominant);
    CHECK(c.a_upper > 0.1 * c.a_dominant);
}

TEST_CASE("analysed damped tone in power is subsynchronous") {
    const auto x = sample(1.5, [](double t) { return 0.5 + 0.05 * std::exp(-3.0 * t) * std::sin(kTwoPi * 9.0 * t); });
    const ResonanceReport r = analyze_signal(x, kFs, 50.0, ChannelKind::Power, "P");
    CHECK(r.cls == ResonanceClass::SSR);
    CHECK(r.freq_hz == doctest::Approx(9.0).epsilon(0.02));
    CHECK(r.zeta == doctest::Approx(3.0 / std::hypot(3.0, kTwoPi * 9.0)).epsilon(0.1));
}
