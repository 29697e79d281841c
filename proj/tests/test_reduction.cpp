#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hamosc/reduction.hpp"

using namespace hamosc;

namespace {

std::vector<double> grid01(int count = 64, double b = 1.0) {
    std::vector<double> g;
    for (int i = 0; i <= count; ++i) g.push_back(b * i / count);
    return g;
}

Matrix random_hermitian(int n, unsigned seed, double scale) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix H(n, n);
    for (int i = 0; i < n; ++i) {
        H(i, i) = scale * d(rng);
        for (int j = 0; j < i; ++j) {
            std::complex<double> v{scale * d(rng), scale * d(rng)};
            H(i, j) = v;
            H(j, i) = std::conj(v);
        }
    }
    return H;
}

Matrix random_complex(int n, unsigned seed, double scale) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = {scale * d(rng), scale * d(rng)};
    return M;
}

}  // namespace

TEST_CASE("factorization reduction with identity transforms") {
    Matrix Z2 = Matrix::Zero(2, 2), I = Matrix::Identity(2, 2);
    SystemSpec sys = SystemSpec::constant(Z2, I, Matrix(-I));
    auto g = grid01();
    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);
    SqrtReduction r = reduce_via_factorization(sys, fac, 1, g);
    CHECK(r.drift.at(0.5).norm() <= 1e-9);
    CHECK((r.potential.at(0.5) + I).norm() <= 1e-9);
    CHECK(r.theta(0.5) == doctest::Approx(-1.0));

    SystemSpec sys2 = SystemSpec::constant(Z2, I, Matrix(Eigen::Vector2cd(-1.0, -4.0).asDiagonal()));
    DriftFactorization fac2 = drift_factorization(sys2.A_fn(), sys2.B_fn(), g);
    SqrtReduction r2 = reduce_via_factorization(sys2, fac2, 2, g);
    CHECK(r2.theta(0.3) == doctest::Approx(-4.0));
}

TEST_CASE("factorization reduction with off-diagonal drift") {
    Matrix A(2, 2);
    A << 0.0, 1.0, 0.0, 0.0;
    Matrix I = Matrix::Identity(2, 2);
    SystemSpec sys = SystemSpec::constant(A, I, Matrix(-I));
    auto g = grid01();
    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);

    SqrtReduction r1 = reduce_via_factorization(sys, fac, 1, g);
    CHECK((r1.drift.at(0.4) - A).norm() <= 1e-9);
    CHECK(r1.theta(0.4) == doctest::Approx(-1.0));  // |[drift]_21|^2 = 0

    SqrtReduction r2 = reduce_via_factorization(sys, fac, 2, g);
    CHECK(r2.theta(0.4) == doctest::Approx(0.0).epsilon(1e-9));  // -1 + |[drift]_12|^2
}

TEST_CASE("unsolvable factorization is rejected with the named error") {
    Matrix A = Matrix::Zero(2, 2);
    A(1, 0) = 1.0;
    Matrix B = Matrix::Zero(2, 2);
    B(0, 0) = 1.0;
    SystemSpec sys = SystemSpec::constant(A, B, Matrix(Matrix::Zero(2, 2)));
    auto g = grid01();
    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);
    CHECK_THROWS_AS(reduce_via_factorization(sys, fac, 1, g), UnsolvableFactorization);
}

TEST_CASE("oscillation test system carries the negated coefficient") {
    Matrix Z2 = Matrix::Zero(2, 2), I = Matrix::Identity(2, 2);
    SystemSpec sys = SystemSpec::constant(Z2, I, Matrix(-I));
    auto g = grid01();
    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);
    SqrtReduction r = reduce_via_factorization(sys, fac, 1, g);
    ScalarSystem2x2 s = oscillation_test_system(r);
    // theta = -1 must reduce to the harmonic companion pair phi' = psi, psi' = -phi
    CHECK(s.p11(0.2) == 0.0);
    CHECK(s.p12(0.2) == 1.0);
    CHECK(s.p21(0.2) == doctest::Approx(-1.0));
    CHECK(s.p22(0.2) == doctest::Approx(0.0));
    CHECK(s.E(0.2) == doctest::Approx(0.0));
}

TEST_CASE("second order companion form") {
    auto s = second_order_as_system([](double) { return 0.0; }, [](double) { return 1.0; });
    CHECK(s.p12(0.1) == 1.0);
    CHECK(s.p21(0.1) == doctest::Approx(-1.0));
    CHECK(s.p22(0.1) == doctest::Approx(0.0));

    auto s2 = second_order_as_system([](double) { return 2.0; }, [](double) { return 1.0; });
    CHECK(s2.p21(0.1) == doctest::Approx(-1.0));
    CHECK(s2.p22(0.1) == doctest::Approx(-2.0));
    CHECK(s2.E(0.1) == doctest::Approx(2.0));
}

TEST_CASE("unitary reduction in the diagonal corollary setting") {
    // B diagonal, A = 0: the tracked transformation is the identity and chi
    // collapses to the potential diagonal.
    Matrix Z2 = Matrix::Zero(2, 2);
    Matrix B = Matrix::Zero(2, 2);
    B(0, 0) = 1.0;
    B(1, 1) = 0.5;
    Matrix C(2, 2);
    C << -2.0, 0.3, 0.3, -1.0;
    SystemSpec sys = SystemSpec::constant(Z2, B, C);
    auto g = grid01();
    EigenPath ep = eigen_path(sys.B_fn(), g);
    UnitaryReduction r = reduce_via_unitary(sys, ep, 1, g);
    CHECK(r.rotated_drift.at(0.6).norm() <= 1e-9);
    CHECK(r.chi(0.6) == doctest::Approx(-2.0));
    CHECK(r.b_j(0.6) == doctest::Approx(1.0));
    CHECK(r.chi_continuous);
    CHECK(!r.guard.ever(2));  // b_2 = 0.5 never triggers the guard
}

TEST_CASE("guarded quotient activates on the singular channel") {
    Matrix Z2 = Matrix::Zero(2, 2);
    Matrix B = Matrix::Zero(2, 2);
    B(0, 0) = 1.0;  // b_2 == 0
    Matrix C = Matrix::Zero(2, 2);
    C(0, 0) = -1.0;
    SystemSpec sys = SystemSpec::constant(Z2, B, C);
    auto g = grid01();
    EigenPath ep = eigen_path(sys.B_fn(), g);
    UnitaryReduction r = reduce_via_unitary(sys, ep, 1, g);
    CHECK(r.chi(0.5) == doctest::Approx(-1.0));
    CHECK(r.guard.ever(2));
    CHECK(r.guard.fraction(2) == doctest::Approx(1.0));

    ScalarSystem2x2 s = as_scalar_system(r);
    CHECK(s.p11(0.5) == doctest::Approx(0.0));
    CHECK(s.p12(0.5) == doctest::Approx(1.0));
    CHECK(s.p21(0.5) == doctest::Approx(-1.0));
    CHECK(s.p22(0.5) == 0.0);
}

TEST_CASE("constant unitary frame has vanishing derivative correction") {
    Matrix H(2, 2);
    H << 2.0, std::complex<double>(0.4, 0.1), std::complex<double>(0.4, -0.1), 1.0;
    Matrix A(2, 2);
    A << std::complex<double>(0.0, 0.2), 1.0, -1.0, 0.1;
    SystemSpec sys = SystemSpec::constant(A, H, Matrix(-Matrix::Identity(2, 2)));
    auto g = grid01();
    EigenPath ep = eigen_path(sys.B_fn(), g);
    CHECK(ep.continuity_defect <= 1e-12);
    UnitaryReduction r = reduce_via_unitary(sys, ep, 1, g);
    Matrix U = ep.U[32];
    // (U*)' = 0, so the rotated drift is U A U*
    CHECK((r.rotated_drift.at(0.5) - U * A * U.adjoint()).norm() <= 1e-7);
}

TEST_CASE("negative eigenvalues of B are rejected") {
    Matrix Z2 = Matrix::Zero(2, 2);
    Matrix B = Matrix::Zero(2, 2);
    B(0, 0) = 1.0;
    B(1, 1) = -0.2;
    SystemSpec sys = SystemSpec::constant(Z2, B, Matrix(Matrix::Zero(2, 2)));
    auto g = grid01();
    EigenPath ep = eigen_path(sys.B_fn(), g);
    CHECK_THROWS_AS(reduce_via_unitary(sys, ep, 1, g), NegativeEigenvalue);
}

TEST_CASE("structural invariants on random systems") {
    for (unsigned seed : {21u, 22u, 23u, 24u}) {
        int n = 2 + static_cast<int>(seed % 2);
        Matrix A = random_complex(n, seed, 0.7);
        Matrix Braw = random_complex(n, seed + 50, 0.7);
        Matrix B = Braw.adjoint() * Braw;  // PSD
        Matrix C = random_hermitian(n, seed + 90, 0.9);
        SystemSpec sys = SystemSpec::constant(A, B, C);
        auto g = grid01(96);

        DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);
        REQUIRE(fac.all_solvable());  // B is almost surely invertible
        for (int j = 1; j <= n; ++j) {
            SqrtReduction r = reduce_via_factorization(sys, fac, j, g);
            for (double t : {0.1, 0.5, 0.9}) {
                Matrix P = r.potential.at(t);
                CHECK((P - P.adjoint()).norm() <= 1e-10 * std::max(1.0, P.norm()));
                CHECK(r.theta(t) - P(j - 1, j - 1).real() >= -1e-12);
            }
        }

        EigenPath ep = eigen_path(sys.B_fn(), g);
        for (int j = 1; j <= n; ++j) {
            UnitaryReduction r = reduce_via_unitary(sys, ep, j, g);
            for (double t : {0.1, 0.5, 0.9}) {
                Matrix P = r.rotated_potential.at(t);
                CHECK((P - P.adjoint()).norm() <= 1e-10 * std::max(1.0, P.norm()));
                // chi exceeds the potential diagonal when no guard is active
                CHECK(r.chi(t) - P(j - 1, j - 1).real() >= -1e-12);
            }
        }
    }
}
