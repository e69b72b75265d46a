#include "gfmlab/ringdown.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "gfmlab/errors.hpp"
#include "gfmlab/simulator.hpp"
#include "number_format.hpp"

namespace gfmlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinWindow = 0.2;      // s
constexpr double kDominantEnergy = 0.05;
constexpr double kPencilRate = 250.0;   // Hz, lower bound after block averaging
constexpr std::size_t kPencilSamples = 500;

std::vector<double> detrended(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = static_cast<double>(k);
        st += t;
        sx += x[k];
        stt += t * t;
        stx += t * x[k];
    }
    const double den = n * stt - st * st;
    const double slope = den != 0.0 ? (n * stx - st * sx) / den : 0.0;
    const double mean = (sx - slope * st) / n;
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - mean - slope * static_cast<double>(k);
    return out;
}

double rms(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

/// Block-averaging factor for the pencil. Averaging maps a pole z to z^D exactly,
/// so continuous-time poles survive; only the sample count shrinks.
std::size_t pencil_decimation(std::size_t n, double fs) {
    const auto by_rate = static_cast<std::size_t>(std::max(1.0, std::floor(fs / kPencilRate)));
    const std::size_t by_count = (n + kPencilSamples - 1) / kPencilSamples;
    return std::max<std::size_t>(1, std::min(by_rate, by_count));
}

std::optional<FittedMode> matching_mode(const std::vector<FittedMode>& modes, double f_hz) {
    const double tol = std::max(1.0, 0.1 * f_hz);
    std::optional<FittedMode> best;
    for (const auto& m : modes) {
        if (m.freq_hz <= 0.0 || std::abs(m.freq_hz - f_hz) > tol) continue;
        if (!best || m.energy_fraction > best->energy_fraction) best = m;
    }
    return best;
}

/// Keeps only the spectral content within +-half_width of f_hz (zero-phase FFT mask).
std::vector<double> band_limited(std::span<const double> x, double fs, double f_hz, double half_width) {
    Eigen::FFT<double> fft;
    const std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, in);
    const std::size_t n = in.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double f = static_cast<double>(std::min(k, n - k)) * fs / static_cast<double>(n);
        if (std::abs(f - f_hz) > half_width) spec[k] = 0.0;
    }
    std::vector<double> out;
    fft.inv(out, spec);
    out.resize(n);
    return out;
}

/// Phase-a current rebuilt from grid-frame dq deviations (linear trend removed).
std::vector<double> phase_a_deviation(std::span<const double> i_d, std::span<const double> i_q, double fs, double f1) {
    const std::vector<double> d = detrended(i_d);
    const std::vector<double> q = detrended(i_q);
    std::vector<double> out(d.size());
    const double w = 2.0 * kPi * f1 / fs;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double a = w * static_cast<double>(k);
        out[k] = d[k] * std::cos(a) - q[k] * std::sin(a);
    }
    return out;
}

}  // namespace

Spectrum estimate_spectrum(std::span<const double> signal, double fs) {
    if (!(fs > 0.0)) throw InsufficientData("sample rate must be > 0");
    if (static_cast<double>(signal.size()) / fs < kMinWindow) {
        throw InsufficientData("spectrum needs at least 0.2 s of data");
    }
    const std::size_t n = signal.size();
    std::vector<double> x = detrended(signal);
    double wsum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n - 1)));
        x[k] *= w;
        wsum += w;
    }
    std::size_t nfft = 1;
    while (nfft < 8 * n) nfft <<= 1;
    x.resize(nfft, 0.0);

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> bins;
    fft.fwd(bins, x);

    Spectrum s;
    s.fs = fs;
    s.samples = n;
    s.padded = nfft;
    s.signal_scale = max_abs(signal);
    const std::size_t half = nfft / 2;
    s.freq_hz.resize(half + 1);
    s.magnitude.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        s.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(nfft);
        s.magnitude[k] = (k == 0 ? 1.0 : 2.0) * std::abs(bins[k]) / wsum;
    }
    return s;
}

std::vector<SpectralPeak> find_peaks(const Spectrum& s, double f_lo, double f_hi, double rel_floor) {
    std::vector<SpectralPeak> peaks;
    const auto& m = s.magnitude;
    const double flat = 1e-9 * std::max(s.signal_scale, 1e-300);
    for (std::size_t k = 1; k + 1 < m.size(); ++k) {
        if (s.freq_hz[k] < f_lo || s.freq_hz[k] > f_hi) continue;
        if (!(m[k] > m[k - 1] && m[k] >= m[k + 1])) continue;
        const double a = m[k - 1], b = m[k], c = m[k + 1];
        const double den = a - 2.0 * b + c;
        const double delta = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
        const SpectralPeak p{(static_cast<double>(k) + delta) * s.resolution(), b - 0.25 * (a - c) * delta};
        if (p.amplitude > flat) peaks.push_back(p);
    }
    std::sort(peaks.begin(), peaks.end(), [](const auto& x, const auto& y) { return x.amplitude > y.amplitude; });
    if (!peaks.empty() && rel_floor > 0.0) {
        const double cut = rel_floor * peaks.front().amplitude;
        std::erase_if(peaks, [&](const SpectralPeak& p) { return p.amplitude < cut; });
    }
    return peaks;
}

std::optional<SpectralPeak> dominant_peak(const Spectrum& s, double f_lo, double f_hi) {
    const auto peaks = find_peaks(s, f_lo, f_hi);
    if (peaks.empty()) return std::nullopt;
    return peaks.front();
}

std::vector<FittedMode> fit_modes(std::span<const double> segment, double fs, int max_order) {
    if (segment.size() < 16) throw InsufficientData("ringdown fit needs at least 16 samples");
    if (max_order < 1) throw InsufficientData("model order must be >= 1");

    // settle toward the final value so that the offset does not use up a pole
    const std::size_t tail = std::max<std::size_t>(1, segment.size() / 20);
    double final_value = 0.0;
    for (std::size_t k = segment.size() - tail; k < segment.size(); ++k) final_value += segment[k];
    final_value /= static_cast<double>(tail);

    const std::size_t dec = pencil_decimation(segment.size(), fs);
    const std::size_t n = segment.size() / dec;
    const double fs_d = fs / static_cast<double>(dec);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t m = 0; m < n; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dec; ++k) acc += segment[m * dec + k] - final_value;
        y(static_cast<Eigen::Index>(m)) = acc / static_cast<double>(dec);
    }
    const double total = y.squaredNorm();
    if (!(total > 0.0)) return {};

    // Hankel data matrix Y(i, j) = y[i + j] with pencil parameter L = n/2
    const auto pencil = static_cast<Eigen::Index>(n / 2);
    Eigen::MatrixXd hankel(static_cast<Eigen::Index>(n) - pencil, pencil + 1);
    for (Eigen::Index i = 0; i < hankel.rows(); ++i) {
        for (Eigen::Index j = 0; j < hankel.cols(); ++j) hankel(i, j) = y(i + j);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(hankel, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int order = 0;
    while (order < max_order && order < sv.size() && sv(order) > 1e-9 * sv(0)) ++order;
    if (order == 0) return {};

    const Eigen::MatrixXd v = svd.matrixV().leftCols(order);
    const Eigen::Index l = v.rows();
    const Eigen::MatrixXd v1 = v.topRows(l - 1);
    const Eigen::MatrixXd v2 = v.bottomRows(l - 1);
    const Eigen::MatrixXd a = v1.completeOrthogonalDecomposition().solve(v2);
    const Eigen::VectorXcd z = a.eigenvalues();

    // residues by least squares on the Vandermonde basis
    Eigen::MatrixXcd basis(static_cast<Eigen::Index>(n), order);
    for (int k = 0; k < order; ++k) {
        std::complex<double> p{1.0, 0.0};
        for (Eigen::Index i = 0; i < basis.rows(); ++i) {
            basis(i, k) = p;
            p *= z(k);
        }
    }
    const Eigen::VectorXcd c = basis.colPivHouseholderQr().solve(y.cast<std::complex<double>>());

    std::vector<FittedMode> modes;
    for (int k = 0; k < order; ++k) {
        if (z(k).imag() < -1e-12) continue;  // counted with its conjugate
        const bool real = std::abs(z(k).imag()) <= 1e-12;
        const std::complex<double> s = std::log(z(k)) * fs_d;
        FittedMode m;
        m.pole = real ? std::complex<double>{s.real(), 0.0} : s;
        m.freq_hz = real ? 0.0 : s.imag() / (2.0 * kPi);
        const double mag = std::abs(m.pole);
        m.zeta = mag > 0.0 ? -m.pole.real() / mag : 0.0;

        double energy = 0.0;
        for (Eigen::Index i = 0; i < basis.rows(); ++i) {
            const std::complex<double> term = c(k) * basis(i, k);
            const double value = real ? term.real() : 2.0 * term.real();
            energy += value * value;
        }
        m.energy_fraction = energy / total;
        // undo the block-average gain to express the amplitude on the original samples
        std::complex<double> gain{0.0, 0.0};
        const std::complex<double> z1 = std::exp(m.pole / fs);
        std::complex<double> p{1.0, 0.0};
        for (std::size_t j = 0; j < dec; ++j) {
            gain += p;
            p *= z1;
        }
        gain /= static_cast<double>(dec);
        m.amplitude = (real ? 1.0 : 2.0) * std::abs(c(k) / gain);
        modes.push_back(m);
    }
    std::sort(modes.begin(), modes.end(),
              [](const FittedMode& x, const FittedMode& y) { return x.energy_fraction > y.energy_fraction; });
    return modes;
}

FittedMode fit_ringdown(std::span<const double> segment, double fs, int max_order) {
    const auto modes = fit_modes(segment, fs, max_order);
    if (modes.empty() || modes.front().energy_fraction < kDominantEnergy) {
        throw NoDominantMode("no mode carries 5% of the segment energy");
    }
    return modes.front();
}

const char* to_string(ResonanceClass c) {
    switch (c) {
        case ResonanceClass::SR: return "SR";
        case ResonanceClass::SSR: return "SSR";
        case ResonanceClass::NSR: return "NSR";
        case ResonanceClass::None: break;
    }
    return "None";
}

ResonanceClass band_of(double f, double f1, ChannelKind kind, const ClassifyOptions& opt) {
    if (kind == ChannelKind::Current) {
        // phase currents carry dq modes as images at f1 -/+ f_dq
        const double f_dq = std::abs(f - f1);
        if (f_dq >= opt.sr_lo * f1 && f_dq <= opt.sr_hi * f1) return ResonanceClass::SR;
        if (f > f1 && f < opt.nsr_hi * f1) return ResonanceClass::NSR;
        if (f < f1 && f_dq >= opt.ssr_floor_hz && f_dq <= opt.ssr_hi * f1) return ResonanceClass::SSR;
        return ResonanceClass::None;
    }
    if (f >= opt.sr_lo * f1 && f <= opt.sr_hi * f1) return ResonanceClass::SR;
    if (f >= opt.ssr_floor_hz && f <= opt.ssr_hi * f1) return ResonanceClass::SSR;
    return ResonanceClass::None;
}

namespace {

/// Damping of the dq-frame mode behind a phase-current component.
double image_zeta(const FittedMode& m, double f1) {
    const double sigma = -m.pole.real();
    const double w = kTwoPi * std::abs(m.freq_hz - f1);
    const double mag = std::hypot(sigma, w);
    return mag > 0.0 ? sigma / mag : 0.0;
}

}  // namespace

ResonanceReport classify_resonance(const std::optional<SpectralPeak>& peak, const std::optional<FittedMode>& mode,
                                   double deviation_rms, double f1, ChannelKind kind, std::string channel,
                                   const ClassifyOptions& opt) {
    ResonanceReport r;
    r.channel = std::move(channel);
    if (!peak) return r;
    r.freq_hz = peak->freq_hz;
    r.amplitude = peak->amplitude;
    if (mode) r.zeta = kind == ChannelKind::Current ? image_zeta(*mode, f1) : mode->zeta;
    if (!(peak->amplitude >= opt.amplitude_floor * deviation_rms) || !(deviation_rms > 0.0)) return r;
    if (r.zeta > opt.zeta_max) return r;
    r.cls = band_of(peak->freq_hz, f1, kind, opt);
    return r;
}

ResonanceReport analyze_signal(std::span<const double> segment, double fs, double f1, ChannelKind kind,
                               std::string channel, const ClassifyOptions& opt) {
    const Spectrum s = estimate_spectrum(segment, fs);
    const double f_hi = (kind == ChannelKind::Current ? opt.nsr_hi : opt.sr_hi) * f1;
    const auto peak = dominant_peak(s, opt.ssr_floor_hz, f_hi);
    const double dev = rms(detrended(segment));
    if (!peak || dev <= 1e-12 * std::max(1.0, s.signal_scale)) {
        ResonanceReport r;
        r.channel = std::move(channel);
        return r;
    }
    std::optional<FittedMode> mode = matching_mode(fit_modes(segment, fs), peak->freq_hz);
    if (!mode) {
        // a crowded segment: isolate the peak and fit it alone
        const double half = std::max(2.0, 0.3 * peak->freq_hz);
        const auto narrow = band_limited(segment, fs, peak->freq_hz, half);
        mode = matching_mode(fit_modes(narrow, fs, 2), peak->freq_hz);
    }
    return classify_resonance(peak, mode, dev, f1, kind, std::move(channel), opt);
}

CouplingResult coupling_check(std::span<const double> i_d, std::span<const double> i_q, double fs, double f_ssr,
                              double f1) {
    if (i_d.empty() || i_d.size() != i_q.size()) throw InsufficientData("coupling check needs both current axes");
    const Spectrum s = estimate_spectrum(phase_a_deviation(i_d, i_q, fs, f1), fs);
    CouplingResult r;
    const auto dom = dominant_peak(s, 1.0, 3.0 * f1);
    if (!dom) return r;
    r.a_dominant = dom->amplitude;
    auto near = [&](double f) { return dominant_peak(s, f - 1.0, f + 1.0); };
    const auto lo = near(f1 - f_ssr);
    const auto hi = near(f1 + f_ssr);
    if (lo) {
        r.f_lower = lo->freq_hz;
        r.a_lower = lo->amplitude;
    }
    if (hi) {
        r.f_upper = hi->freq_hz;
        r.a_upper = hi->amplitude;
    }
    r.pass = lo && hi && r.a_lower >= 0.1 * r.a_dominant && r.a_upper >= 0.1 * r.a_dominant;
    return r;
}

std::size_t analysis_start(const SimTrace& trace, double t) {
    const auto& time = trace.channel("t");
    const auto it = std::lower_bound(time.begin(), time.end(), t - 1e-12);
    return static_cast<std::size_t>(it - time.begin());
}

TraceAnalysis analyze_trace(const SimTrace& trace, double last_event, double f1, const ClassifyOptions& opt) {
    const double fs = 1.0 / trace.sample_period();
    const std::size_t start = analysis_start(trace, last_event + 0.1);
    auto tail = [&](const char* name) {
        const auto& c = trace.channel(name);
        return std::span<const double>(c).subspan(std::min(start, c.size()));
    };
    TraceAnalysis out;
    out.power = analyze_signal(tail("P"), fs, f1, ChannelKind::Power, "P", opt);

    const auto id = tail("igd_grid");
    const auto iq = tail("igq_grid");
    out.current = analyze_signal(phase_a_deviation(id, iq, fs, f1), fs, f1, ChannelKind::Current, "ia", opt);
    if (out.power.cls == ResonanceClass::SSR) out.coupling = coupling_check(id, iq, fs, out.power.freq_hz, f1);
    return out;
}

void write_report(std::ostream& os, const ResonanceReport& r) {
    os << "channel: " << r.channel << '\n'
       << "class: " << to_string(r.cls) << '\n'
       << "freq_hz: " << detail::num(r.freq_hz) << '\n'
       << "zeta: " << detail::num(r.zeta) << '\n'
       << "amplitude: " << detail::num(r.amplitude) << '\n';
}

void write_report_csv_row(std::ostream& os, const ResonanceReport& r) {
    os << r.channel << ',' << to_string(r.cls) << ',' << detail::num(r.freq_hz) << ',' << detail::num(r.zeta) << ','
       << detail::num(r.amplitude) << '\n';
}

}  // namespace gfmlab
