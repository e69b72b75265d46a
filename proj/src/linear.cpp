#include "gfmlab/linear.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/Polynomials>

#include "gfmlab/errors.hpp"

namespace gfmlab {

int Polynomial::degree() const {
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) {
        if (coeffs[k] != 0.0) return k;
    }
    return -1;
}

std::complex<double> Polynomial::operator()(std::complex<double> s) const {
    std::complex<double> acc{0.0, 0.0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * s + *it;
    return acc;
}

std::vector<std::complex<double>> Polynomial::roots() const {
    const int n = degree();
    if (n <= 0) return {};
    Eigen::VectorXd c(n + 1);
    for (int k = 0; k <= n; ++k) c(k) = coeffs[k];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(c);
    const auto& r = solver.roots();
    std::vector<std::complex<double>> out(r.data(), r.data() + r.size());
    for (const auto& z : out) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericFailure("polynomial root finder failed");
    }
    return out;
}

Polynomial Polynomial::from_roots(const std::vector<std::complex<double>>& roots, double lead) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    Polynomial p;
    p.coeffs.reserve(c.size());
    for (const auto& z : c) p.coeffs.push_back(lead * z.real());
    return p;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.coeffs.empty() || b.coeffs.empty()) return {};
    Polynomial p;
    p.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) p.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return p;
}

Polynomial trimmed(const Polynomial& p, double rel_tol) {
    double peak = 0.0;
    for (double c : p.coeffs) peak = std::max(peak, std::abs(c));
    Polynomial out = p;
    for (double& c : out.coeffs) {
        if (std::abs(c) <= rel_tol * peak) c = 0.0;
    }
    const int deg = out.degree();
    out.coeffs.resize(static_cast<std::size_t>(std::max(deg, 0) + 1));
    if (deg < 0) out.coeffs[0] = 0.0;
    return out;
}

TransferFunction cancel_common_roots(const TransferFunction& tf, double tol) {
    const int nd = tf.num.degree();
    const int dd = tf.den.degree();
    if (nd < 0) return {Polynomial{{0.0}}, Polynomial{{1.0}}};
    if (nd == 0 || dd <= 0) return tf;
    std::vector<std::complex<double>> zeros = tf.num.roots();
    std::vector<std::complex<double>> poles = tf.den.roots();
    bool removed = false;
    for (auto zit = zeros.begin(); zit != zeros.end();) {
        auto best = poles.end();
        double best_d = 0.0;
        for (auto pit = poles.begin(); pit != poles.end(); ++pit) {
            const double d = std::abs(*zit - *pit) / std::max(1.0, std::abs(*pit));
            if (d < tol && (best == poles.end() || d < best_d)) {
                best = pit;
                best_d = d;
            }
        }
        if (best != poles.end()) {
            poles.erase(best);
            zit = zeros.erase(zit);
            removed = true;
        } else {
            ++zit;
        }
    }
    if (!removed) return tf;
    return {Polynomial::from_roots(zeros, tf.num.coeffs[nd]), Polynomial::from_roots(poles, tf.den.coeffs[dd])};
}

std::complex<double> SisoStateSpace::response(std::complex<double> s) const {
    const int n = order();
    if (n == 0) return d;
    Eigen::MatrixXcd m = -a.cast<std::complex<double>>();
    m.diagonal().array() += s;
    const Eigen::VectorXcd x = m.partialPivLu().solve(b.cast<std::complex<double>>());
    return (c.cast<std::complex<double>>() * x)(0) + d;
}

SisoStateSpace realize(const TransferFunction& tf) {
    const int n = tf.den.degree();
    if (n < 0) throw NumericFailure("transfer function has a zero denominator");
    if (!tf.proper()) throw NumericFailure("cannot realize an improper transfer function");
    const double lead = tf.den.coeffs[n];
    std::vector<double> den(n + 1);
    std::vector<double> num(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) den[k] = tf.den.coeffs[k] / lead;
    for (int k = 0; k <= tf.num.degree(); ++k) num[k] = tf.num.coeffs[k] / lead;

    SisoStateSpace sys;
    sys.d = num[n];
    sys.a = Eigen::MatrixXd::Zero(n, n);
    sys.b = Eigen::VectorXd::Zero(n);
    sys.c = Eigen::RowVectorXd::Zero(n);
    if (n == 0) return sys;
    for (int k = 0; k + 1 < n; ++k) sys.a(k, k + 1) = 1.0;
    for (int k = 0; k < n; ++k) {
        sys.a(n - 1, k) = -den[k];
        sys.c(k) = num[k] - sys.d * den[k];
    }
    sys.b(n - 1) = 1.0;
    return sys;
}

Polynomial characteristic_polynomial(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return Polynomial{{1.0}};
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw NumericFailure("eigenvalue computation did not converge");
    const auto& ev = es.eigenvalues();
    return Polynomial::from_roots(std::vector<std::complex<double>>(ev.data(), ev.data() + ev.size()));
}

TransferFunction to_transfer_function(const SisoStateSpace& sys) {
    const Polynomial den = characteristic_polynomial(sys.a);
    const Polynomial closed = characteristic_polynomial(sys.a - sys.b * sys.c);
    Polynomial num;
    num.coeffs.resize(den.coeffs.size());
    for (std::size_t k = 0; k < den.coeffs.size(); ++k) {
        num.coeffs[k] = closed.coeffs[k] - den.coeffs[k] + sys.d * den.coeffs[k];
    }
    // the leading coefficients cancel exactly unless d != 0
    if (sys.d == 0.0 && !num.coeffs.empty()) num.coeffs.back() = 0.0;
    return {num, den};
}

}  // namespace gfmlab
