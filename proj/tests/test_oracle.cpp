#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hamosc/criteria.hpp"
#include "hamosc/oracle.hpp"

using namespace hamosc;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScalarFn constant(double v) {
    return [v](double) { return v; };
}

SystemSpec harmonic(int n = 2) {
    Matrix I = Matrix::Identity(n, n);
    return SystemSpec::constant(Matrix::Zero(n, n), I, Matrix(-I), 0.0, "harmonic");
}

SystemSpec singular_showcase() {
    Matrix A = Matrix::Zero(2, 2);
    Matrix B = Matrix::Zero(2, 2);
    B(0, 0) = 1.0;
    Matrix C = Matrix::Zero(2, 2);
    C(0, 0) = -1.0;
    return SystemSpec::constant(A, B, C, 0.0, "singular-showcase");
}

std::vector<double> grid_on(double a, double b, int count = 64) {
    std::vector<double> g;
    for (int i = 0; i <= count; ++i) g.push_back(a + (b - a) * i / count);
    return g;
}

// Tight tolerances keep the dense-output noise well under the central
// difference step used by the residual checks.
const OdeTolerances kTight{1e-11, 1e-13};

}  // namespace

TEST_CASE("comparison condition on identical coefficient pairs") {
    ComparisonProblem c;
    c.f1 = c.f2 = constant(1.0);
    c.g1 = c.g2 = constant(0.0);
    c.h1 = c.h2 = constant(1.0);
    c.with_default_reference();
    c.t0 = 0.0;
    c.tau0 = 1.4;
    c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 1.4);
    REQUIRE(!c.y2.blow_up.has_value());
    auto y2path = std::make_shared<ScalarRiccatiPath>(c.y2);
    c.eta1 = c.eta2 = [y2path](double t) { return y2path->at(t); };
    c.gamma0 = 0.0;

    ComparisonOutcome out = comparison_condition(c, grid_on(0.0, 1.4));
    CHECK(out.satisfied);
    CHECK(std::abs(out.min_J) <= 1e-12);

    ComparisonVerification v = comparison_predict_and_verify(c, 1.4);
    CHECK(v.verified);
    CHECK(v.y1.at(1.2) == doctest::Approx(-std::tan(1.2)).epsilon(1e-7));
}

TEST_CASE("comparison condition rejects a harder potential") {
    // h1 - ref_h = -1 makes the weighted integral strictly negative
    ComparisonProblem c;
    c.f1 = constant(1.0);
    c.g1 = constant(0.0);
    c.h1 = constant(-2.0);
    c.f2 = constant(1.0);
    c.g2 = constant(0.0);
    c.h2 = constant(-1.0);
    c.with_default_reference();
    c.t0 = 0.0;
    c.tau0 = 2.0;
    c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 2.0);  // tanh, global
    auto y2path = std::make_shared<ScalarRiccatiPath>(c.y2);
    c.eta1 = c.eta2 = [y2path](double t) { return y2path->at(t); };
    c.gamma0 = 0.0;

    ComparisonOutcome out = comparison_condition(c, grid_on(0.0, 2.0));
    CHECK(!out.satisfied);
    CHECK(out.min_J < -0.5);
}

TEST_CASE("comparison condition with a positive coefficient surplus") {
    // everything flat, h1 - ref_h = +1: J(t) = t
    ComparisonProblem c;
    c.f1 = c.f2 = constant(0.0);
    c.g1 = c.g2 = constant(0.0);
    c.h1 = c.h2 = constant(0.0);
    c.with_default_reference();
    c.ref_h = constant(-1.0);
    c.t0 = 0.0;
    c.tau0 = 3.0;
    c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 3.0);
    c.eta1 = c.eta2 = constant(0.0);
    c.gamma0 = 0.0;

    ComparisonOutcome out = comparison_condition(c, grid_on(0.0, 3.0));
    CHECK(out.satisfied);
    CHECK(out.J.back() == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(comparison_predict_and_verify(c, 3.0).verified);
}

TEST_CASE("comparison hypotheses are checked") {
    ComparisonProblem c;
    c.f1 = constant(-1.0);  // violates f1 >= 0
    c.g1 = c.g2 = constant(0.0);
    c.h1 = c.h2 = constant(0.0);
    c.f2 = constant(0.0);
    c.with_default_reference();
    c.t0 = 0.0;
    c.tau0 = 1.0;
    c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 1.0);
    c.eta1 = c.eta2 = constant(0.0);
    c.gamma0 = 0.0;
    CHECK_THROWS_AS(comparison_condition(c, grid_on(0.0, 1.0)), HypothesisViolated);

    c.f1 = constant(0.0);
    c.eta1 = constant(-1.0);  // below y2(t0) = 0
    CHECK_THROWS_AS(comparison_condition(c, grid_on(0.0, 1.0)), HypothesisViolated);
}

TEST_CASE("predicted existence survives an eased potential") {
    // first equation eased by one unit; reference chosen as the first
    // equation's own coefficients makes the condition degenerate-zero
    ComparisonProblem c;
    c.f1 = c.f2 = constant(1.0);
    c.g1 = c.g2 = constant(0.0);
    c.h2 = constant(1.0);
    c.h1 = constant(0.0);  // h1 = h2 - 1
    c.ref_f = c.f1;
    c.ref_g = c.g1;
    c.ref_h = c.h1;
    c.t0 = 0.0;
    c.tau0 = 1.4;
    c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 1.4);
    auto y2path = std::make_shared<ScalarRiccatiPath>(c.y2);
    c.eta1 = c.eta2 = [y2path](double t) { return y2path->at(t); };
    c.gamma0 = 0.0;

    ComparisonOutcome out = comparison_condition(c, grid_on(0.0, 1.4));
    CHECK(out.satisfied);
    ComparisonVerification v = comparison_predict_and_verify(c, 1.4);
    CHECK(v.verified);
    CHECK(std::abs(v.y1.at(1.3)) <= 1e-9);  // y1 stays identically zero
}

TEST_CASE("diagonal residual along the transformed harmonic flow") {
    SystemSpec sys = harmonic();
    auto g = grid_on(0.0, 1.2);
    MatrixRiccatiPath Z = integrate_matrix_riccati(sys, Matrix::Zero(2, 2), 0.0, 1.2, 1e8, kTight);
    REQUIRE(!Z.blow_up.has_value());

    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);
    SqrtReduction red = reduce_via_factorization(sys, fac, 1, g);
    MatrixPath V = transform_by_sqrt(Z, sys.B_fn(), g);

    ResidualTrace tr = diagonal_riccati_residual(V, red, grid_on(0.05, 1.15, 40));
    CHECK(tr.max_abs <= 1e-5);
}

TEST_CASE("diagonal residual vanishes identically on the zero system") {
    Matrix Z2 = Matrix::Zero(2, 2);
    SystemSpec sys = SystemSpec::constant(Z2, Z2, Z2);
    auto g = grid_on(0.0, 2.0);
    Matrix Z0(2, 2);
    Z0 << 0.4, std::complex<double>(0.1, 0.2), std::complex<double>(0.1, -0.2), -0.3;
    MatrixRiccatiPath Z = integrate_matrix_riccati(sys, Z0, 0.0, 2.0, 1e8, kTight);

    DriftFactorization fac = drift_factorization(sys.A_fn(), sys.B_fn(), g);
    SqrtReduction red = reduce_via_factorization(sys, fac, 1, g);
    MatrixPath V = transform_by_sqrt(Z, sys.B_fn(), g);  // sqrt(0) kills the path
    ResidualTrace tr = diagonal_riccati_residual(V, red, grid_on(0.2, 1.8, 20));
    CHECK(tr.max_abs <= 1e-12);
}

TEST_CASE("weighted diagonal residual on the singular showcase") {
    SystemSpec sys = singular_showcase();
    auto g = grid_on(0.0, 1.2);
    MatrixRiccatiPath Z = integrate_matrix_riccati(sys, Matrix::Zero(2, 2), 0.0, 1.2, 1e8, kTight);
    REQUIRE(!Z.blow_up.has_value());

    EigenPath ep = eigen_path(sys.B_fn(), g);
    UnitaryReduction red = reduce_via_unitary(sys, ep, 1, g);
    MatrixPath V = transform_by_unitary(Z, ep, g);
    ResidualTrace tr = diagonal_riccati_residual(V, red, grid_on(0.05, 1.15, 40));
    CHECK(tr.max_abs <= 1e-5);
}

TEST_CASE("empirical oracle on the harmonic system") {
    SystemSpec sys = harmonic();
    OracleParams params;
    params.trials = 5;
    params.seed = 42;
    OracleOutcome out = empirical_oracle(sys, Window(0.0, 4.0), params);
    CHECK(out.all_zero);
    REQUIRE(out.trials.size() == 7);  // identity + near-singular + 5 random
    CHECK(out.trials[0].label == "identity_zero");
    CHECK(out.trials[1].label == "near_singular");
    for (const auto& t : out.trials) {
        CHECK(!t.indeterminate);
        CHECK(!t.zeros.empty());
    }
    // the distinguished identity trial sees zeros at pi/2 + k pi
    CHECK(std::abs(out.trials[0].zeros[0] - kPi / 2) <= 1e-6);
}

TEST_CASE("flat system yields SomeNonZero") {
    Matrix Z2 = Matrix::Zero(2, 2);
    SystemSpec sys = SystemSpec::constant(Z2, Z2, Z2);
    OracleParams params;
    params.trials = 2;
    OracleOutcome out = empirical_oracle(sys, Window(0.0, 5.0), params);
    CHECK(!out.all_zero);
}

TEST_CASE("oracle is deterministic for a fixed seed") {
    SystemSpec sys = harmonic();
    OracleParams params;
    params.trials = 3;
    params.seed = 7;
    OracleOutcome a = empirical_oracle(sys, Window(0.0, 4.0), params);
    OracleOutcome b = empirical_oracle(sys, Window(0.0, 4.0), params);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t k = 0; k < a.trials.size(); ++k) {
        REQUIRE(a.trials[k].zeros.size() == b.trials[k].zeros.size());
        for (std::size_t i = 0; i < a.trials[k].zeros.size(); ++i)
            CHECK(a.trials[k].zeros[i] == b.trials[k].zeros[i]);
    }
}

TEST_CASE("proven window verdicts are confirmed by the oracle") {
    // criterion soundness: a ProvenOscillatory window must show a zero of
    // every sampled conjoined solution
    OracleParams params;
    params.trials = 20;
    params.seed = 2026;

    SystemSpec h = harmonic();
    Window wh(0.0, kPi + 1e-3);
    REQUIRE(diagonal_window_criterion(h, 1, wh).verdict == Verdict::ProvenOscillatory);
    CHECK(empirical_oracle(h, wh, params).all_zero);

    SystemSpec s = singular_showcase();
    Window ws(0.0, kPi + 1e-3);
    REQUIRE(unitary_route_window(s, 1, ws).verdict == Verdict::ProvenOscillatory);
    CHECK(empirical_oracle(s, ws, params).all_zero);
}
