#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace gfmlab {

/// Polynomial with real coefficients in ascending powers: c[0] + c[1] s + ...
struct Polynomial {
    std::vector<double> coeffs;

    int degree() const;
    std::complex<double> operator()(std::complex<double> s) const;
    std::vector<std::complex<double>> roots() const;

    static Polynomial from_roots(const std::vector<std::complex<double>>& roots, double lead = 1.0);
};

Polynomial operator*(const Polynomial& a, const Polynomial& b);

/// Zeroes coefficients below rel_tol times the largest one.
Polynomial trimmed(const Polynomial& p, double rel_tol = 1e-10);

/// Rational transfer function num(s)/den(s).
struct TransferFunction {
    Polynomial num;
    Polynomial den;

    std::complex<double> operator()(std::complex<double> s) const { return num(s) / den(s); }
    bool proper() const { return num.degree() <= den.degree(); }
};

/// Removes numerator/denominator root pairs closer than tol (relative to max(1, |root|)).
TransferFunction cancel_common_roots(const TransferFunction& tf, double tol = 1e-6);

/// Single-input single-output state-space realization.
struct SisoStateSpace {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
    double d = 0.0;

    int order() const { return static_cast<int>(a.rows()); }
    std::complex<double> response(std::complex<double> s) const;
};

/// Controllable canonical realization of a proper transfer function.
SisoStateSpace realize(const TransferFunction& tf);

/// Characteristic polynomial det(sI - A) built from the eigenvalues of A.
Polynomial characteristic_polynomial(const Eigen::MatrixXd& a);

/// Numerator/denominator of c (sI - A)^-1 b + d.
TransferFunction to_transfer_function(const SisoStateSpace& sys);

}  // namespace gfmlab
