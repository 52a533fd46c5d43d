#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "graphsmooth/dense.hpp"
#include "graphsmooth/rng.hpp"

using namespace graphsmooth;
using Catch::Matchers::WithinAbs;

namespace {

Matrix random_symmetric(int n, Rng& rng) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a(i, j) = a(j, i) = rng.normal();
    return a;
}

} // namespace

TEST_CASE("Jacobi recovers a known 2x2 spectrum") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    a(0, 1) = a(1, 0) = -1.0;
    const auto eig = symmetric_eigen(a);
    REQUIRE_THAT(eig.eigenvalues[0], WithinAbs(2.0, 1e-12));
    REQUIRE_THAT(eig.eigenvalues[1], WithinAbs(0.0, 1e-12));
}

TEST_CASE("Jacobi eigenpairs satisfy A v = lambda v and orthonormality") {
    Rng rng(7);
    for (int n : {3, 5, 8, 12}) {
        const Matrix a = random_symmetric(n, rng);
        const auto eig = symmetric_eigen(a);
        for (int j = 0; j < n; ++j) {
            std::vector<double> v(n);
            for (int i = 0; i < n; ++i) v[i] = eig.eigenvectors(i, j);
            const std::vector<double> av = a * v;
            for (int i = 0; i < n; ++i)
                REQUIRE_THAT(av[i], WithinAbs(eig.eigenvalues[j] * v[i], 1e-9));
            for (int k = 0; k <= j; ++k) {
                std::vector<double> w(n);
                for (int i = 0; i < n; ++i) w[i] = eig.eigenvectors(i, k);
                REQUIRE_THAT(dot(v, w), WithinAbs(k == j ? 1.0 : 0.0, 1e-10));
            }
        }
        // descending order
        for (int j = 0; j + 1 < n; ++j)
            REQUIRE(eig.eigenvalues[j] >= eig.eigenvalues[j + 1] - 1e-12);
    }
}

TEST_CASE("Jacobi trace and eigenvalue-sum agree") {
    Rng rng(17);
    const int n = 10;
    const Matrix a = random_symmetric(n, rng);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a(i, i);
    const auto eig = symmetric_eigen(a, false);
    double sum = 0.0;
    for (double lam : eig.eigenvalues) sum += lam;
    REQUIRE_THAT(sum, WithinAbs(trace, 1e-10 * std::max(1.0, std::abs(trace))));
}

TEST_CASE("gauss_solve solves random well-conditioned systems") {
    Rng rng(23);
    for (int n : {1, 4, 9}) {
        Matrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
            a(i, i) += n; // diagonally dominant
        }
        std::vector<double> x_true(n);
        for (double& v : x_true) v = rng.normal();
        const std::vector<double> b = a * x_true;
        const std::vector<double> x = gauss_solve(a, b);
        for (int i = 0; i < n; ++i) REQUIRE_THAT(x[i], WithinAbs(x_true[i], 1e-10));
    }
}

TEST_CASE("gauss_solve reports singular matrices") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 4.0;
    REQUIRE_THROWS_AS(gauss_solve(a, {1.0, 1.0}), std::runtime_error);
}

TEST_CASE("symmetric_pinv_apply inverts on the range and kills the kernel") {
    // Projection-like PSD matrix with a known null direction (1,1)/sqrt(2).
    Matrix a(2, 2);
    a(0, 0) = a(1, 1) = 1.0;
    a(0, 1) = a(1, 0) = -1.0;
    // b in range: b = (1,-1), A x = b has min-norm solution (0.5, -0.5)
    const std::vector<double> x = symmetric_pinv_apply(a, {1.0, -1.0});
    REQUIRE_THAT(x[0], WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(x[1], WithinAbs(-0.5, 1e-12));
    // b in kernel maps to zero
    const std::vector<double> z = symmetric_pinv_apply(a, {3.0, 3.0});
    REQUIRE_THAT(z[0], WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(z[1], WithinAbs(0.0, 1e-12));
}
