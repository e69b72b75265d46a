#include <doctest.h>

#include <algorithm>

#include "gen.hpp"
#include "gfmlab/linear.hpp"

using namespace gfmlab;

namespace {

std::vector<std::complex<double>> random_roots(Gen& g, int n) {
    std::vector<std::complex<double>> r;
    while (static_cast<int>(r.size()) < n) {
        if (n - static_cast<int>(r.size()) >= 2 && g.coin()) {
            const std::complex<double> p{-g.uniform(0.1, 5.0), g.uniform(0.5, 5.0)};
            r.push_back(p);
            r.push_back(std::conj(p));
        } else {
            r.emplace_back(-g.uniform(0.1, 5.0), 0.0);
        }
    }
    return r;
}

double match_error(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b) {
    double worst = 0.0;
    for (const auto& x : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](auto p, auto q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

}  // namespace

TEST_CASE("polynomial evaluation and product") {
    const Polynomial p{{1.0, 2.0, 3.0}};  // 1 + 2s + 3s^2
    CHECK(p.degree() == 2);
    CHECK(p({2.0, 0.0}).real() == doctest::Approx(17.0));
    const Polynomial q = p * Polynomial{{-1.0, 1.0}};
    CHECK(q.degree() == 3);
    CHECK(q({2.0, 0.0}).real() == doctest::Approx(17.0));
    CHECK(trimmed(Polynomial{{1.0, 1e-14, 0.0}}).degree() == 0);
}

TEST_CASE("roots invert from_roots") {
    Gen g(21);
    for (int k = 0; k < 100; ++k) {
        const auto r = random_roots(g, g.integer(1, 6));
        const Polynomial p = Polynomial::from_roots(r, g.uniform(0.5, 2.0));
        for (double c : p.coeffs) CHECK(std::isfinite(c));
        CHECK(match_error(r, p.roots()) < 1e-6);
    }
}

TEST_CASE("realization reproduces the transfer function") {
    Gen g(22);
    for (int k = 0; k < 100; ++k) {
        const int n = g.integer(1, 5);
        const Polynomial den = Polynomial::from_roots(random_roots(g, n), 1.0);
        Polynomial num;
        const int m = g.integer(0, n);
        for (int j = 0; j <= m; ++j) num.coeffs.push_back(g.uniform(-2.0, 2.0));
        const TransferFunction tf{num, den};
        const SisoStateSpace ss = realize(tf);
        CHECK(ss.order() == n);
        for (double w : {0.1, 1.0, 3.0, 20.0}) {
            const std::complex<double> s{0.0, w};
            CHECK(std::abs(ss.response(s) - tf(s)) <= 1e-8 * std::max(1.0, std::abs(tf(s))));
        }
        const TransferFunction back = to_transfer_function(ss);
        for (double w : {0.2, 2.0}) {
            const std::complex<double> s{0.0, w};
            CHECK(std::abs(back(s) - tf(s)) <= 1e-6 * std::max(1.0, std::abs(tf(s))));
        }
    }
}

TEST_CASE("common roots cancel") {
    const Polynomial num = Polynomial::from_roots({{-1.0, 0.0}, {-3.0, 0.0}}, 2.0);
    const Polynomial den = Polynomial::from_roots({{-1.0, 0.0}, {-2.0, 1.0}, {-2.0, -1.0}}, 1.0);
    const TransferFunction tf = cancel_common_roots({num, den});
    CHECK(tf.num.degree() == 1);
    CHECK(tf.den.degree() == 2);
    const std::complex<double> s{0.3, 1.7};
    CHECK(std::abs(tf(s) - num(s) / den(s)) < 1e-9);
}

TEST_CASE("characteristic polynomial of a companion matrix") {
    Eigen::MatrixXd a(2, 2);
    a << 0.0, 1.0, -6.0, -5.0;  // s^2 + 5s + 6
    const Polynomial p = characteristic_polynomial(a);
    REQUIRE(p.degree() == 2);
    CHECK(p.coeffs[0] / p.coeffs[2] == doctest::Approx(6.0));
    CHECK(p.coeffs[1] / p.coeffs[2] == doctest::Approx(5.0));
}
