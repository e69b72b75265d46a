#include "gfmlab/smallsignal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "gfmlab/errors.hpp"
#include "number_format.hpp"

namespace gfmlab {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterDomainError(what);
}

int find_label(const std::vector<std::string>& labels, const std::string& label) {
    const auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

std::vector<int> resolve(const std::vector<std::string>& wanted, const std::vector<std::string>& all,
                         const char* kind) {
    std::vector<int> idx;
    if (wanted.empty()) {
        for (std::size_t k = 0; k < all.size(); ++k) idx.push_back(static_cast<int>(k));
        return idx;
    }
    for (const auto& w : wanted) {
        const int k = find_label(all, w);
        if (k < 0) throw ConfigError(std::string("unknown ") + kind + " label '" + w + "'");
        idx.push_back(k);
    }
    return idx;
}

}  // namespace

int LinearModel::input_index(const std::string& label) const { return find_label(input_labels, label); }
int LinearModel::output_index(const std::string& label) const { return find_label(output_labels, label); }

SisoStateSpace LinearModel::channel(const std::string& input, const std::string& output) const {
    const int i = input_index(input);
    const int o = output_index(output);
    if (i < 0) throw ConfigError("unknown input label '" + input + "'");
    if (o < 0) throw ConfigError("unknown output label '" + output + "'");
    SisoStateSpace s;
    s.a = a;
    s.b = b.col(i);
    s.c = c.row(o);
    s.d = d(o, i);
    return s;
}

LinearModel linearize(const ConverterModel& model, const OperatingPoint& op, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs, double rel_step, double abs_step) {
    const Eigen::VectorXd& x0 = op.x0;
    const Eigen::VectorXd& u0 = op.u0;
    if (x0.size() != static_cast<Eigen::Index>(model.state_size()) ||
        u0.size() != static_cast<Eigen::Index>(model.input_size())) {
        throw VariantMismatch("operating point does not belong to this model");
    }
    const double residual = model.derivatives(x0, u0).norm();
    if (!(residual < 1e-8)) {
        throw NotAnEquilibrium("linearization point residual " + detail::num(residual) + " exceeds 1e-8");
    }
    const std::vector<int> in_idx = resolve(inputs, model.input_labels(), "input");
    const std::vector<int> out_idx = resolve(outputs, ConverterModel::output_labels(), "output");

    const Eigen::Index n = x0.size();
    const Eigen::Index m = static_cast<Eigen::Index>(in_idx.size());
    const Eigen::Index p = static_cast<Eigen::Index>(out_idx.size());
    LinearModel lin;
    lin.a.resize(n, n);
    lin.b.resize(n, m);
    lin.c.resize(p, n);
    lin.d.resize(p, m);
    lin.state_labels = model.state_labels();
    for (int k : in_idx) lin.input_labels.push_back(model.input_labels()[k]);
    for (int k : out_idx) lin.output_labels.push_back(ConverterModel::output_labels()[k]);
    lin.op = op;

    auto pick = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd r(p);
        for (Eigen::Index k = 0; k < p; ++k) r(k) = y(out_idx[k]);
        return r;
    };
    auto step_of = [&](double v) { return std::max(rel_step * std::abs(v), abs_step); };

    Eigen::VectorXd x = x0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = step_of(x0(j));
        x(j) = x0(j) + h;
        const Eigen::VectorXd fp = model.derivatives(x, u0);
        const Eigen::VectorXd yp = pick(model.outputs(x, u0));
        x(j) = x0(j) - h;
        const Eigen::VectorXd fm = model.derivatives(x, u0);
        const Eigen::VectorXd ym = pick(model.outputs(x, u0));
        x(j) = x0(j);
        lin.a.col(j) = (fp - fm) / (2.0 * h);
        lin.c.col(j) = (yp - ym) / (2.0 * h);
    }
    Eigen::VectorXd u = u0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const int k = in_idx[j];
        const double h = step_of(u0(k));
        u(k) = u0(k) + h;
        const Eigen::VectorXd fp = model.derivatives(x0, u);
        const Eigen::VectorXd yp = pick(model.outputs(x0, u));
        u(k) = u0(k) - h;
        const Eigen::VectorXd fm = model.derivatives(x0, u);
        const Eigen::VectorXd ym = pick(model.outputs(x0, u));
        u(k) = u0(k);
        lin.b.col(j) = (fp - fm) / (2.0 * h);
        lin.d.col(j) = (yp - ym) / (2.0 * h);
    }
    if (!lin.a.allFinite()) throw NumericFailure("linearization produced non-finite entries");
    return lin;
}

LinearModel drop_states(const LinearModel& model, const std::vector<std::string>& labels) {
    std::vector<Eigen::Index> keep;
    for (std::size_t k = 0; k < model.state_labels.size(); ++k) {
        if (std::find(labels.begin(), labels.end(), model.state_labels[k]) == labels.end()) {
            keep.push_back(static_cast<Eigen::Index>(k));
        }
    }
    const auto n = static_cast<Eigen::Index>(keep.size());
    LinearModel out = model;
    out.a.resize(n, n);
    out.b.resize(n, model.b.cols());
    out.c.resize(model.c.rows(), n);
    out.state_labels.clear();
    for (Eigen::Index r = 0; r < n; ++r) {
        out.state_labels.push_back(model.state_labels[keep[r]]);
        out.b.row(r) = model.b.row(keep[r]);
        out.c.col(r) = model.c.col(keep[r]);
        for (Eigen::Index c = 0; c < n; ++c) out.a(r, c) = model.a(keep[r], keep[c]);
    }
    return out;
}

std::vector<Mode> eigenmodes(const LinearModel& model) {
    const Eigen::Index n = model.a.rows();
    std::vector<Mode> modes;
    if (n == 0) return modes;
    if (!model.a.allFinite()) throw NumericFailure("state matrix is not finite");
    Eigen::EigenSolver<Eigen::MatrixXd> es(model.a, true);
    if (es.info() != Eigen::Success) throw NumericFailure("eigenvalue computation did not converge");
    const Eigen::MatrixXcd right = es.eigenvectors();
    const Eigen::MatrixXcd left = right.inverse();

    for (Eigen::Index k = 0; k < n; ++k) {
        Mode m;
        m.eigenvalue = es.eigenvalues()(k);
        const double mag = std::abs(m.eigenvalue);
        m.freq_hz = std::abs(m.eigenvalue.imag()) / (2.0 * std::numbers::pi);
        m.zeta = mag > 0.0 ? -m.eigenvalue.real() / mag : 0.0;

        std::vector<double> part(static_cast<std::size_t>(n));
        double total = 0.0;
        for (Eigen::Index s = 0; s < n; ++s) {
            part[s] = std::abs(left(k, s) * right(s, k));
            total += part[s];
        }
        std::vector<std::pair<std::string, double>> ranked;
        for (Eigen::Index s = 0; s < n; ++s) {
            const double share = total > 0.0 ? part[s] / total : 0.0;
            if (share >= 0.1) ranked.emplace_back(model.state_labels[s], share);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        if (ranked.size() > 4) ranked.resize(4);
        m.participants = std::move(ranked);
        modes.push_back(std::move(m));
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.freq_hz != b.freq_hz) return a.freq_hz < b.freq_hz;
        if (a.eigenvalue.real() != b.eigenvalue.real()) return a.eigenvalue.real() < b.eigenvalue.real();
        return a.eigenvalue.imag() > b.eigenvalue.imag();
    });
    return modes;
}

const Mode* least_damped(const std::vector<Mode>& modes, double f_lo, double f_hi) {
    const Mode* best = nullptr;
    for (const auto& m : modes) {
        if (m.freq_hz < f_lo || m.freq_hz > f_hi) continue;
        if (!best || m.zeta < best->zeta) best = &m;
    }
    return best;
}

std::vector<std::complex<double>> freq_response(const LinearModel& model, const std::string& input,
                                                const std::string& output, const std::vector<double>& omega) {
    const SisoStateSpace sys = model.channel(input, output);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (!(omega[k] > 0.0) || (k > 0 && !(omega[k] > omega[k - 1]))) {
            throw ParameterDomainError("frequency grid must be positive and ascending");
        }
    }
    const Eigen::Index n = sys.a.rows();
    const Eigen::MatrixXcd a = sys.a.cast<std::complex<double>>();
    const Eigen::VectorXcd b = sys.b.cast<std::complex<double>>();
    const Eigen::RowVectorXcd c = sys.c.cast<std::complex<double>>();
    std::vector<std::complex<double>> out;
    out.reserve(omega.size());
    const double inf = std::numeric_limits<double>::infinity();
    for (double w : omega) {
        if (n == 0) {
            out.emplace_back(sys.d, 0.0);
            continue;
        }
        Eigen::MatrixXcd m = -a;
        m.diagonal().array() += std::complex<double>(0.0, w);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
        if (lu.rcond() < 1e-15) {
            out.emplace_back(inf, 0.0);
            continue;
        }
        const std::complex<double> g = (c * lu.solve(b))(0) + sys.d;
        out.push_back(std::isfinite(g.real()) && std::isfinite(g.imag()) ? g : std::complex<double>(inf, 0.0));
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    require(lo > 0.0 && hi > lo && n >= 2, "log grid needs 0 < lo < hi and n >= 2");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int k = 0; k < n; ++k) g[k] = std::pow(10.0, a + (b - a) * k / (n - 1));
    return g;
}

// ---------------------------------------------------------------------------

std::array<std::complex<double>, 2> plant_poles(double r, double l, double omega_1) {
    require(l > 0.0, "inductance must be > 0");
    require(r >= 0.0, "resistance must be >= 0");
    require(omega_1 > 0.0, "omega_1 must be > 0");
    return {std::complex<double>(-r / l, omega_1), std::complex<double>(-r / l, -omega_1)};
}

double SecondOrder::damped_hz() const {
    const double z2 = std::min(zeta * zeta, 1.0);
    return omega_n * std::sqrt(1.0 - z2) / (2.0 * std::numbers::pi);
}

SecondOrder psc_second_order(double k_p, double omega_c, double x, double v_g, double e) {
    require(k_p > 0.0 && x > 0.0 && v_g > 0.0 && e > 0.0, "PSC model inputs must be > 0");
    require(omega_c > 0.0 && std::isfinite(omega_c), "PSC model needs a finite LPF bandwidth");
    const double gain = k_p * v_g * e / x;
    return {0.5 * std::sqrt(omega_c / gain), std::sqrt(gain * omega_c)};
}

std::array<std::complex<double>, 2> droop_pole_estimate(double r, double l, double k_p, double e, double v_d0,
                                                        double kappa, double omega_1) {
    require(l > 0.0, "inductance must be > 0");
    require(omega_1 > 0.0, "omega_1 must be > 0");
    const double re = -(2.0 * r - kappa * k_p * e * v_d0 / omega_1) / (2.0 * l);
    return {std::complex<double>(re, omega_1), std::complex<double>(re, -omega_1)};
}

double droop_gain_limit(double r) {
    require(r >= 0.0, "resistance must be >= 0");
    return 2.0 * r;
}

double vr_design_kp(double r_a, double v, double kappa, double omega_1) {
    require(r_a > 0.0 && v > 0.0 && kappa > 0.0 && omega_1 > 0.0, "VR design inputs must be > 0");
    return omega_1 * r_a / (kappa * v * v);
}

VrPoles vr_mode_poles(double r, double l, double r_a, double omega_v, double omega_1) {
    require(l > 0.0, "inductance must be > 0");
    require(r >= 0.0 && r_a >= 0.0 && omega_v >= 0.0, "VR pole inputs must be >= 0");
    // [(s l + r)(s + w_v) + r_a s]^2 + (w_1 l)^2 (s + w_v)^2
    const Polynomial a{{r * omega_v, l * omega_v + r + r_a, l}};
    const Polynomial b{{omega_1 * l * omega_v, omega_1 * l}};
    const Polynomial a2 = a * a;
    const Polynomial b2 = b * b;
    Polynomial quartic = a2;
    for (std::size_t k = 0; k < b2.coeffs.size(); ++k) quartic.coeffs[k] += b2.coeffs[k];
    // scale s by omega_1 for conditioning
    Polynomial scaled = quartic;
    double f = 1.0;
    for (double& c : scaled.coeffs) {
        c *= f;
        f *= omega_1;
    }
    VrPoles out;
    for (const auto& z : scaled.roots()) out.all.push_back(z * omega_1);
    std::sort(out.all.begin(), out.all.end(), [](const auto& x, const auto& y) {
        if (std::abs(x.imag()) != std::abs(y.imag())) return std::abs(x.imag()) < std::abs(y.imag());
        return x.imag() > y.imag();
    });
    for (const auto& z : out.all) {
        const double ratio = std::abs(z.imag()) / omega_1;
        if (ratio >= 0.8 && ratio <= 1.2) {
            out.synchronous.push_back(z);
        } else if (ratio < 0.5) {
            out.subsynchronous.push_back(z);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_modes_csv(std::ostream& os, const std::vector<Mode>& modes) {
    os << "re,im,freq_hz,zeta,participants\n";
    for (const auto& m : modes) {
        os << detail::num(m.eigenvalue.real()) << ',' << detail::num(m.eigenvalue.imag()) << ','
           << detail::num(m.freq_hz) << ',' << detail::num(m.zeta) << ',';
        for (std::size_t k = 0; k < m.participants.size(); ++k) {
            if (k) os << ';';
            os << m.participants[k].first << ':' << detail::num(m.participants[k].second);
        }
        os << '\n';
    }
}

void write_bode_csv(std::ostream& os, const std::vector<double>& omega,
                    const std::vector<std::complex<double>>& response) {
    os << "omega_rad_s,mag_db,phase_deg\n";
    for (std::size_t k = 0; k < omega.size() && k < response.size(); ++k) {
        const auto& g = response[k];
        const double mag = std::abs(g);
        const double db = std::isinf(g.real()) ? std::numeric_limits<double>::infinity() : 20.0 * std::log10(mag);
        const double phase = std::isinf(g.real()) ? 0.0 : std::arg(g) * 180.0 / std::numbers::pi;
        os << detail::num(omega[k]) << ',' << detail::num(db) << ',' << detail::num(phase) << '\n';
    }
}

}  // namespace gfmlab
