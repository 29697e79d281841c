// Acceptance suite: end-to-end checks with analytically derived expected
// values. Prints one PASS/FAIL line per criterion; the exit code is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "expr_corpus.hpp"
#include "hamosc/criteria.hpp"
#include "hamosc/dynamics.hpp"
#include "hamosc/oracle.hpp"
#include "hamosc/system.hpp"

using namespace hamosc;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int idx, bool ok, const std::string& label, const std::string& detail) {
    std::cout << "[" << (ok ? "PASS" : "FAIL") << "] criterion " << idx << ": " << label << " ("
              << detail << ")\n";
    if (!ok) ++failures;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
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

Matrix seeded_hermitian(int n, std::mt19937_64& rng, double scale) {
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

Matrix seeded_complex(int n, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = {scale * d(rng), scale * d(rng)};
    return M;
}

std::vector<double> linspace(double a, double b, int count) { return uniform_grid(a, b, count); }

// --- criterion 1 -----------------------------------------------------------

void criterion_1() {
    Timer timer;
    SystemSpec sys = harmonic();
    Matrix I = Matrix::Identity(2, 2);
    Trajectory traj = integrate_hamiltonian(sys, I, Matrix::Zero(2, 2), 0.0, 20.0);
    ZeroDetection det = detect_zeros(traj, Window(0.0, 20.0));
    double elapsed = timer.seconds();

    bool ok = det.zeros.size() == 6;
    double worst = 0.0;
    if (ok) {
        for (std::size_t k = 0; k < det.zeros.size(); ++k) {
            double expect = kPi / 2 + static_cast<double>(k) * kPi;
            worst = std::max(worst, std::abs(det.zeros[k].t - expect));
        }
        ok = worst <= 1e-6;
    }
    ok = ok && elapsed < 1.0;
    report(1, ok, "harmonic det-zero times are pi/2 + k*pi on [0,20]",
           "count=" + std::to_string(det.zeros.size()) + ", max |dt|=" + fmt(worst) + ", " +
               fmt(elapsed) + " s");
}

// --- criterion 2 -----------------------------------------------------------

void criterion_2() {
    Timer timer;
    std::mt19937_64 rng(424242);
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
        int n = 2 + trial % 3;
        SystemSpec sys = SystemSpec::constant(seeded_complex(n, rng, 0.08),
                                              seeded_hermitian(n, rng, 0.08),
                                              seeded_hermitian(n, rng, 0.08));
        Matrix H = seeded_hermitian(n, rng, 1.0);
        Trajectory traj = integrate_hamiltonian(sys, Matrix::Identity(n, n), H, 0.0, 100.0);
        worst = std::max(worst, traj.max_relative_defect());
    }
    double elapsed = timer.seconds();
    ok = worst <= 1e-8 && elapsed < 10.0;
    report(2, ok, "conjoinedness is conserved over spans of length 100",
           "max relative defect=" + fmt(worst) + ", " + fmt(elapsed) + " s");
}

// --- criterion 3 -----------------------------------------------------------

void criterion_3() {
    auto grid = linspace(0.0, 2.0, 128);
    bool ok = true;
    std::string detail;

    Matrix Ac(2, 2);
    Ac << 0.0, 1.0, -0.3, 0.2;
    std::vector<MatrixFn> bs;
    bs.push_back([](double) { return Matrix(Matrix::Identity(2, 2)); });
    Matrix Bc(2, 2);
    Bc << 2.0, 1.0, 1.0, 2.0;
    bs.push_back([Bc](double) { return Bc; });
    bs.push_back([](double t) {
        Matrix M = Matrix::Zero(2, 2);
        M(0, 0) = 1.0 + t * t;
        M(1, 1) = 2.0;
        return M;
    });
    double worst_res = 0.0, worst_inv = 0.0;
    for (const MatrixFn& B : bs) {
        DriftFactorization fac = drift_factorization([Ac](double) { return Ac; }, B, grid);
        if (!fac.all_solvable()) ok = false;
        worst_res = std::max(worst_res, fac.max_residual());
        for (std::size_t k = 0; k < grid.size(); k += 16) {
            Matrix S = hermitian_sqrt(B(grid[k]));
            worst_inv = std::max(worst_inv, (fac.F.values[k] - S.inverse()).norm());
        }
    }
    ok = ok && worst_res <= 1e-10 && worst_inv <= 1e-8;

    Matrix Au = Matrix::Zero(2, 2);
    Au(1, 0) = 1.0;
    Matrix Bu = Matrix::Zero(2, 2);
    Bu(0, 0) = 1.0;
    DriftFactorization fu = drift_factorization([Au](double) { return Au; },
                                                [Bu](double) { return Bu; }, grid);
    bool counterexample = !fu.all_solvable() && fu.solvable_fraction() == 0.0;
    ok = ok && counterexample;
    report(3, ok, "drift factorization solves invertible B and rejects the rank-deficient pair",
           "max residual=" + fmt(worst_res) + ", max |F - inv(sqrt B)|=" + fmt(worst_inv) +
               ", counterexample " + (counterexample ? "unsolvable" : "NOT detected"));
}

// --- criterion 4 -----------------------------------------------------------

void criterion_4() {
    SystemSpec sys = harmonic();
    CriterionReport above = diagonal_window_criterion(sys, 1, Window(0.0, kPi + 1e-3));
    CriterionReport below = diagonal_window_criterion(sys, 1, Window(0.0, kPi - 0.1));
    bool verdicts = above.verdict == Verdict::ProvenOscillatory &&
                    below.verdict == Verdict::Inconclusive;

    OracleParams params;
    params.trials = 20;
    params.seed = 11;
    OracleOutcome oracle = empirical_oracle(sys, Window(0.0, kPi + 1e-3), params);
    bool ok = verdicts && oracle.all_zero;
    report(4, ok, "diagonal window criterion flips at length pi and the oracle confirms",
           std::string("above=") + verdict_name(above.verdict) + ", below=" +
               verdict_name(below.verdict) + ", oracle=" +
               (oracle.all_zero ? "AllZero" : "SomeNonZero"));
}

// --- criterion 5 -----------------------------------------------------------

void criterion_5() {
    SystemSpec sys = singular_showcase();
    CriterionReport rep = unitary_route_window(sys, 1, Window(0.0, kPi + 1e-3));
    double guard = rep.diagnostics.contains("guard_activity")
                       ? rep.diagnostics["guard_activity"].value("2", 0.0)
                       : 0.0;
    OracleParams params;
    params.trials = 20;
    params.seed = 12;
    OracleOutcome oracle = empirical_oracle(sys, Window(0.0, kPi + 1e-3), params);
    bool ok = rep.verdict == Verdict::ProvenOscillatory && guard == 1.0 && oracle.all_zero;
    report(5, ok, "singular-B pipeline proves the showcase window with the guard active",
           std::string("verdict=") + verdict_name(rep.verdict) + ", guard activity m=2: " +
               fmt(guard) + ", oracle=" + (oracle.all_zero ? "AllZero" : "SomeNonZero"));
}

// --- criterion 6 -----------------------------------------------------------

void criterion_6() {
    const OdeTolerances tight{1e-11, 1e-13};
    SystemSpec sys = harmonic();
    Matrix I = Matrix::Identity(2, 2);

    Trajectory traj = integrate_hamiltonian(sys, I, Matrix::Zero(2, 2), 0.0, 1.4, tight);
    MatrixRiccatiPath Z = integrate_matrix_riccati(sys, Matrix::Zero(2, 2), 0.0, 1.4, 1e8, tight);
    double worst = 0.0;
    bool ok = !Z.blow_up.has_value();
    if (ok) {
        Trajectory back = riccati_to_hamiltonian(Z, sys, I);
        for (int k = 1; k <= 14; ++k) {
            double t = 1.4 * k / 14.0;
            worst = std::max(worst, (back.at(t).first - traj.at(t).first).norm());
        }
        ok = worst <= 1e-6;
    }

    // scalar blow-up versus the first sigma_min zero
    ScalarRiccatiPath y = integrate_scalar_riccati([](double) { return 1.0; },
                                                   [](double) { return 0.0; },
                                                   [](double) { return 1.0; }, 0.0, 0.0, 3.0);
    Trajectory traj3 = integrate_hamiltonian(sys, I, Matrix::Zero(2, 2), 0.0, 3.0);
    ZeroDetection det = detect_zeros(traj3, Window(0.0, 3.0));
    double gap = 1e9;
    if (y.blow_up && !det.zeros.empty()) gap = std::abs(y.blow_up->t - det.zeros.front().t);
    ok = ok && gap <= 1e-3;
    report(6, ok, "Riccati correspondences: round trip and blow-up/zero matching",
           "roundtrip error=" + fmt(worst) + ", blow-up gap=" + fmt(gap));
}

// --- criterion 7 -----------------------------------------------------------

void criterion_7() {
    const OdeTolerances tight{1e-11, 1e-13};
    auto inner = linspace(0.05, 1.15, 40);

    SystemSpec h = harmonic();
    auto g = linspace(0.0, 1.2, 64);
    MatrixRiccatiPath Zh = integrate_matrix_riccati(h, Matrix::Zero(2, 2), 0.0, 1.2, 1e8, tight);
    DriftFactorization fac = drift_factorization(h.A_fn(), h.B_fn(), g);
    SqrtReduction redh = reduce_via_factorization(h, fac, 1, g);
    double rh = diagonal_riccati_residual(transform_by_sqrt(Zh, h.B_fn(), g), redh, inner).max_abs;

    SystemSpec s = singular_showcase();
    MatrixRiccatiPath Zs = integrate_matrix_riccati(s, Matrix::Zero(2, 2), 0.0, 1.2, 1e8, tight);
    EigenPath ep = eigen_path(s.B_fn(), g);
    UnitaryReduction reds = reduce_via_unitary(s, ep, 1, g);
    double rs = diagonal_riccati_residual(transform_by_unitary(Zs, ep, g), reds, inner).max_abs;

    bool ok = rh <= 1e-5 && rs <= 1e-5;
    report(7, ok, "diagonal identity residuals stay below 1e-5 along transformed flows",
           "plain=" + fmt(rh) + ", weighted=" + fmt(rs));
}

// --- criterion 8 -----------------------------------------------------------

void criterion_8() {
    int failed = 0;
    auto grid = linspace(0.0, 1.4, 64);
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };

    {  // equal coefficients
        ComparisonProblem c;
        c.f1 = c.f2 = one;
        c.g1 = c.g2 = zero;
        c.h1 = c.h2 = one;
        c.with_default_reference();
        c.t0 = 0.0;
        c.tau0 = 1.4;
        c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 1.4);
        auto y2p = std::make_shared<ScalarRiccatiPath>(c.y2);
        c.eta1 = c.eta2 = [y2p](double t) { return y2p->at(t); };
        c.gamma0 = 0.0;
        if (!comparison_condition(c, grid).satisfied) ++failed;
        if (!comparison_predict_and_verify(c, 1.4).verified) ++failed;
    }
    {  // eased potential, reference pinned to the first equation
        ComparisonProblem c;
        c.f1 = c.f2 = one;
        c.g1 = c.g2 = zero;
        c.h2 = one;
        c.h1 = zero;
        c.ref_f = c.f1;
        c.ref_g = c.g1;
        c.ref_h = c.h1;
        c.t0 = 0.0;
        c.tau0 = 1.4;
        c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 1.4);
        auto y2p = std::make_shared<ScalarRiccatiPath>(c.y2);
        c.eta1 = c.eta2 = [y2p](double t) { return y2p->at(t); };
        c.gamma0 = 0.0;
        if (!comparison_condition(c, grid).satisfied) ++failed;
        if (!comparison_predict_and_verify(c, 1.4).verified) ++failed;
    }
    {  // positive surplus against a shifted reference
        ComparisonProblem c;
        c.f1 = c.f2 = zero;
        c.g1 = c.g2 = zero;
        c.h1 = c.h2 = zero;
        c.with_default_reference();
        c.ref_h = [](double) { return -1.0; };
        c.t0 = 0.0;
        c.tau0 = 3.0;
        c.y2 = integrate_scalar_riccati(c.f2, c.g2, c.h2, 0.0, 0.0, 3.0);
        c.eta1 = c.eta2 = zero;
        c.gamma0 = 0.0;
        if (!comparison_condition(c, linspace(0.0, 3.0, 64)).satisfied) ++failed;
        if (!comparison_predict_and_verify(c, 3.0).verified) ++failed;
    }
    report(8, failed == 0, "comparison condition holds and predicted solutions survive",
           std::to_string(failed) + " failures across the corpus");
}

// --- criterion 9 -----------------------------------------------------------

void criterion_9() {
    ScalarSystem2x2 s;
    s.p11 = s.p22 = [](double) { return 0.0; };
    s.p12 = [](double) { return 1.0; };
    s.p21 = [](double) { return -1.0; };

    double worst = 0.0;
    for (double L : {1.0, 3.0, kPi + 1e-3, 5.0}) {
        CriterionReport rep = window_integral_criterion(s, Window(0.0, L));
        worst = std::max(worst, std::abs(rep.diagnostics["integral"].get<double>() - L));
    }
    CriterionReport lo = window_integral_criterion(s, Window(0.0, kPi - 1e-3));
    CriterionReport hi = window_integral_criterion(s, Window(0.0, kPi + 1e-3));
    bool ok = worst <= 1e-9 && lo.verdict == Verdict::Inconclusive &&
              hi.verdict == Verdict::ProvenOscillatory;
    report(9, ok, "window integral is exact and the verdict flips across length pi",
           "max |I - L|=" + fmt(worst) + ", below=" + verdict_name(lo.verdict) + ", above=" +
               verdict_name(hi.verdict));
}

// --- criterion 10 ----------------------------------------------------------

double ref_eval(const ExprNode& n, double t);

double ref_eval_binary(const ExprNode& n, double t) {
    double a = ref_eval(*n.args[0], t);
    double b = ref_eval(*n.args[1], t);
    switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
            if (b == 0.0) throw std::domain_error("div0");
            return a / b;
        case '^':
            if (a == 0.0 && b < 0.0) throw std::domain_error("0^neg");
            if (a < 0.0 && b != std::rint(b)) throw std::domain_error("neg^frac");
            return std::pow(a, b);
    }
    throw std::domain_error("op");
}

double ref_eval(const ExprNode& n, double t) {
    switch (n.kind) {
        case ExprKind::Number: return n.number;
        case ExprKind::Time: return t;
        case ExprKind::Constant:
            return n.constant == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
        case ExprKind::Negate: return -ref_eval(*n.args[0], t);
        case ExprKind::Binary: return ref_eval_binary(n, t);
        case ExprKind::Call: {
            double a = ref_eval(*n.args[0], t);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Exp: return std::exp(a);
                case Func::Log:
                    if (a <= 0.0) throw std::domain_error("log");
                    return std::log(a);
                case Func::Sqrt:
                    if (a < 0.0) throw std::domain_error("sqrt");
                    return std::sqrt(a);
                case Func::Abs: return std::fabs(a);
                case Func::Min: return std::fmin(a, ref_eval(*n.args[1], t));
                case Func::Max: return std::fmax(a, ref_eval(*n.args[1], t));
            }
        }
    }
    throw std::domain_error("node");
}

void criterion_10() {
    int mismatches = 0;
    const double ts[] = {-2.5, -1.0, 0.0, 0.4, 1.0, 1.7, 3.14, 8.0};
    for (int i = 0; i < kExprCorpusSize; ++i) {
        Expr e = Expr::parse(kExprCorpus[i]);
        for (double t : ts) {
            bool lib_threw = false, ref_threw = false;
            double lv = 0.0, rv = 0.0;
            try {
                lv = e.eval(t);
            } catch (const EvalError&) {
                lib_threw = true;
            }
            try {
                rv = ref_eval(e.root(), t);
            } catch (const std::domain_error&) {
                ref_threw = true;
            }
            if (lib_threw != ref_threw ||
                (!lib_threw && std::memcmp(&lv, &rv, sizeof lv) != 0))
                ++mismatches;
        }
    }

    // malformed system files are rejected with located errors
    int loader_ok = 0;
    auto expect_reject = [&loader_ok](const std::string& text, const std::string& needle) {
        fs::path p = fs::temp_directory_path() / "hamosc_acceptance_system.json";
        std::ofstream(p) << text;
        try {
            load_system(p);
        } catch (const Error& err) {
            if (std::string(err.what()).find(needle) != std::string::npos) ++loader_ok;
            return;
        }
    };
    expect_reject(R"({"n":1,"t0":0,"A":[["2*+t"]],"B":[["1"]],"C":[["0"]]})", "A[0][0]");
    expect_reject(R"({"n":2,"t0":0,"A":[["0","0"],["0","0"]],"B":[["1","0"],["0","1"]],
                     "C":[["0","1"],["0","0"]]})", "not Hermitian");
    expect_reject(R"({"n":2,"t0":0,"A":[["0"],["0","0"]],"B":[["1","0"],["0","1"]],
                     "C":[["0","0"],["0","0"]]})", "A[0]");

    bool ok = mismatches == 0 && loader_ok == 3 && kExprCorpusSize >= 50;
    report(10, ok, "expression corpus matches the reference to 0 ulp; bad files are located",
           "corpus=" + std::to_string(kExprCorpusSize) + ", mismatches=" +
               std::to_string(mismatches) + ", loader rejections=" + std::to_string(loader_ok) +
               "/3");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures;
}
