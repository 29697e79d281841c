#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hamosc/dynamics.hpp"
#include "hamosc/reduction.hpp"

namespace hamosc {

/// Inputs of the Riccati comparison test between
///     y' + f1·y² + g1·y + h1 = 0   and   y' + f2·y² + g2·y + h2 = 0.
/// y2 is a solution path of the second equation on [t0, tau0); eta1 and
/// eta2 solve the corresponding differential inequalities with
/// eta_k(t0) ≥ y2(t0). The unsubscripted reference coefficients of the
/// weighted condition are explicit inputs (ref_*); `with_default_reference`
/// sets them to (f2, g2, h2).
struct ComparisonProblem {
    ScalarFn f1, g1, h1;
    ScalarFn f2, g2, h2;
    ScalarFn ref_f, ref_g, ref_h;
    ScalarRiccatiPath y2;
    ScalarFn eta1, eta2;
    double gamma0 = 0.0;
    double t0 = 0.0;
    double tau0 = 0.0;

    void with_default_reference();
};

struct ComparisonOutcome {
    bool satisfied = false;
    std::vector<double> grid;
    std::vector<double> J;  // margin trace
    double min_J = 0.0;
    double error_bound = 0.0;
};

/// Evaluates J(t) = ∫_{t0}^t exp{∫_{t0}^τ [ref_f·(eta1+eta2) + ref_g]}
///                  · [(f1−ref_f)·y2² + (g1−ref_g)·y2 + (h1−ref_h)] dτ
/// on the grid; satisfied iff J stays above −error_bound everywhere.
/// Throws HypothesisViolated when f1 < 0 somewhere or eta_k(t0) < y2(t0)
/// or gamma0 < y2(t0).
ComparisonOutcome comparison_condition(const ComparisonProblem& c, const std::vector<double>& grid);

struct ComparisonVerification {
    bool verified = false;  // no blow-up of the first equation before span_end
    ScalarRiccatiPath y1;
};

/// Executable form of the comparison conclusion: integrates the first
/// equation from gamma0 across the (closed) span and reports whether it
/// survived.
ComparisonVerification comparison_predict_and_verify(const ComparisonProblem& c, double span_end);

struct ResidualTrace {
    std::vector<double> t;
    std::vector<double> value;
    double max_abs = 0.0;
};

/// Residual of the diagonal scalar identity along a transformed Hermitian
/// path V(t) (built from a Riccati solution):
///   v' + v² + 2·Re[drift]_jj·v + Σ_{m≠j} |v_jm + conj([drift]_mj)|² − theta.
ResidualTrace diagonal_riccati_residual(const MatrixPath& V, const SqrtReduction& red,
                                        const std::vector<double>& eval_times);

/// Weighted variant along the unitary route:
///   v' + b_j·v² + 2·Re[drift]_jj·v
///     + Σ_{m≠j} b_m·|v_jm + conj([drift]_mj)/b_m|₀² − chi,
/// with the guarded term zero wherever b_m vanishes.
ResidualTrace diagonal_riccati_residual(const MatrixPath& V, const UnitaryReduction& red,
                                        const std::vector<double>& eval_times);

/// V(t) = √B(t) · Z(t) · √B(t)
MatrixPath transform_by_sqrt(const MatrixRiccatiPath& Z, const MatrixFn& B,
                             const std::vector<double>& grid);
/// V(t) = U(t) · Z(t) · U*(t)
MatrixPath transform_by_unitary(const MatrixRiccatiPath& Z, const EigenPath& ep,
                                const std::vector<double>& grid);

struct OracleTrial {
    std::string label;
    bool indeterminate = false;
    std::vector<double> zeros;
    double threshold = 0.0;
};

struct OracleOutcome {
    bool all_zero = false;  // AllZero verdict: every trial exhibited a zero event
    std::vector<OracleTrial> trials;
    std::vector<Trajectory> trajectories;  // kept only on request
};

struct OracleParams {
    int trials = 10;            // random conjoined samples on top of the distinguished pairs
    std::uint64_t seed = 1;
    OdeTolerances tolerances{};
    bool keep_trajectories = false;
    int scan_samples = 4096;
};

/// Monte-Carlo sweep over conjoined initial data: the distinguished pair
/// (I, 0), a near-singular variant (W, H·W) with W = diag(1,...,1,1e-3),
/// and `trials` random pairs (I, H) with H a seeded Gaussian Hermitian
/// matrix scaled to ‖H‖_F ≤ 10. Every pair satisfies the conjoinedness
/// identity by construction. Evidence, never proof.
OracleOutcome empirical_oracle(const SystemSpec& sys, Window w, const OracleParams& params = {});

}  // namespace hamosc
