#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gfmlab {

class SimTrace;

/// Single-sided amplitude spectrum of a detrended, Hann-windowed segment.
/// A pure tone of amplitude A shows a peak of height A.
struct Spectrum {
    std::vector<double> freq_hz;
    std::vector<double> magnitude;
    double fs = 0.0;
    std::size_t samples = 0;   ///< length of the analysed segment
    std::size_t padded = 0;    ///< FFT length after zero padding
    double signal_scale = 0.0; ///< max |x| of the input, for the flatness test

    double resolution() const { return freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 0.0; }
};

struct SpectralPeak {
    double freq_hz = 0.0;
    double amplitude = 0.0;
};

/// Throws InsufficientData below 0.2 s of data.
Spectrum estimate_spectrum(std::span<const double> signal, double fs);

/// Local maxima within [f_lo, f_hi] with parabolic interpolation, strongest first.
/// Peaks below rel_floor times the strongest one are dropped.
std::vector<SpectralPeak> find_peaks(const Spectrum& s, double f_lo, double f_hi, double rel_floor = 0.0);

/// Strongest interpolated peak within [f_lo, f_hi]; nullopt when the band is empty or flat.
std::optional<SpectralPeak> dominant_peak(const Spectrum& s, double f_lo, double f_hi);

struct FittedMode {
    std::complex<double> pole;  ///< continuous-time, rad/s
    double freq_hz = 0.0;
    double zeta = 1.0;
    double amplitude = 0.0;     ///< initial amplitude of the real-valued component
    double energy_fraction = 0.0;
};

/// Matrix-pencil decomposition into at most `max_order` complex exponentials.
/// Conjugate pairs are merged; result is sorted by energy, largest first.
std::vector<FittedMode> fit_modes(std::span<const double> segment, double fs, int max_order = 6);

/// Dominant mode by energy. Throws NoDominantMode when no mode holds 5% of the energy.
FittedMode fit_ringdown(std::span<const double> segment, double fs, int max_order = 6);

enum class ResonanceClass { SR, SSR, NSR, None };
enum class ChannelKind { Power, Current };

const char* to_string(ResonanceClass c);

struct ClassifyOptions {
    double sr_lo = 0.8;        ///< x f1
    double sr_hi = 1.1;        ///< x f1
    double ssr_floor_hz = 1.0;
    double ssr_hi = 0.5;       ///< x f1
    double nsr_hi = 2.0;       ///< x f1, current channels only
    double zeta_max = 0.4;
    double amplitude_floor = 0.01;  ///< fraction of the deviation RMS

    bool operator==(const ClassifyOptions&) const = default;
};

struct ResonanceReport {
    ResonanceClass cls = ResonanceClass::None;
    double freq_hz = 0.0;
    double zeta = 1.0;
    double amplitude = 0.0;
    std::string channel;
};

/// Band a frequency falls into, ignoring damping and amplitude. Power bands apply
/// to the frequency itself. A phase-current component at f is the image of a dq
/// mode at |f - f1|: SR when that mode is synchronous, NSR above f1, SSR below.
ResonanceClass band_of(double freq_hz, double f1, ChannelKind kind, const ClassifyOptions& opt = {});

/// Applies the band, amplitude and damping rules to a spectral peak and its fitted mode.
/// For current channels zeta is that of the underlying dq mode.
ResonanceReport classify_resonance(const std::optional<SpectralPeak>& peak, const std::optional<FittedMode>& mode,
                                   double deviation_rms, double f1, ChannelKind kind, std::string channel,
                                   const ClassifyOptions& opt = {});

/// Full analysis of one channel segment: spectrum, peak, matched pencil mode, class.
ResonanceReport analyze_signal(std::span<const double> segment, double fs, double f1, ChannelKind kind,
                               std::string channel, const ClassifyOptions& opt = {});

struct CouplingResult {
    bool pass = false;
    double f_lower = 0.0;   ///< measured component near f1 - f_ssr
    double f_upper = 0.0;   ///< measured component near f1 + f_ssr
    double a_lower = 0.0;
    double a_upper = 0.0;
    double a_dominant = 0.0;
};

/// Checks for stationary-frame current components at f1 - f_ssr and f1 + f_ssr.
/// Inputs are the grid-frame dq current deviations; phase a is rebuilt with the
/// grid angle omega_1 t. Components within +-1 Hz, each >= 10% of the dominant one.
CouplingResult coupling_check(std::span<const double> i_d, std::span<const double> i_q, double fs, double f_ssr,
                              double f1);

struct TraceAnalysis {
    ResonanceReport power;
    ResonanceReport current;
    std::optional<CouplingResult> coupling;
};

/// Analyses P and the grid current from 100 ms after `last_event` to the end of the trace.
TraceAnalysis analyze_trace(const SimTrace& trace, double last_event, double f1, const ClassifyOptions& opt = {});

/// Index of the first sample at or after time t, clamped to the trace length.
std::size_t analysis_start(const SimTrace& trace, double t);

/// key: value lines.
void write_report(std::ostream& os, const ResonanceReport& r);
/// channel,class,freq_hz,zeta,amplitude
void write_report_csv_row(std::ostream& os, const ResonanceReport& r);

}  // namespace gfmlab
