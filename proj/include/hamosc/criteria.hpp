#pragma once

#include <string>

#include <json.hpp>

#include "hamosc/reduction.hpp"
#include "hamosc/system.hpp"
#include "hamosc/window.hpp"

namespace hamosc {

/// One-sided verdict lattice. No criterion ever asserts non-oscillation:
/// ProvenOscillatory requires a finite-window integral clearing its
/// threshold beyond the quadrature error, DivergenceEvidence is the
/// strongest a truncated ray computation can honestly report, and anything
/// else is Inconclusive.
enum class Verdict { ProvenOscillatory, DivergenceEvidence, Inconclusive };

const char* verdict_name(Verdict v);

struct CriterionReport {
    std::string criterion;  // wire id: thm2.1 thm2.2 thm2.3 thm2.4 cor2.1 cor2.2 thm3.2 thm3.3
    int j = 0;              // channel used; 0 when not applicable
    Verdict verdict = Verdict::Inconclusive;
    double margin = 0.0;
    nlohmann::ordered_json diagnostics;
};

struct CriterionOptions {
    double quad_tol = 1e-9;            // absolute quadrature tolerance
    int stages = 8;                    // checkpoints of the ray criteria
    double divergence_threshold = 10;  // staged integrals must exceed this
    int grid_samples = 2048;           // reduction grid per window/span
    double chi_jump_threshold = -1.0;  // <=0: 1e3 · grid step
};

/// Window criterion for the 2x2 scalar system:
///   ∫_a^b min[ p12·exp(−∫_a^t E), −p21·exp(∫_a^t E) ] dt ≥ π.
/// ProvenOscillatory only when the margin clears the accumulated quadrature
/// error bound. Throws PreconditionFailed when p12 < −1e-12 at a node.
CriterionReport window_integral_criterion(const ScalarSystem2x2& s, Window w,
                                          const CriterionOptions& opt = {});

/// Ray criterion: both of ∫ p12·exp(−∫E) and −∫ p21·exp(∫E) must diverge.
/// Divergence is not numerically certifiable, so the best verdict is
/// DivergenceEvidence: strictly increasing staged values that exceed the
/// threshold at geometrically spaced checkpoints.
CriterionReport ray_divergence_criterion(const ScalarSystem2x2& s, double t0, double horizon,
                                         const CriterionOptions& opt = {});

/// Diagonal-B window criterion: ∫_a^b min[b_j, −c_jj] dt ≥ π. Requires the
/// pure second-kind form: B diagonal with nonnegative diagonal and A ≡ 0.
CriterionReport diagonal_window_criterion(const SystemSpec& sys, int j, Window w,
                                          const CriterionOptions& opt = {});

/// Diagonal-B ray criterion: ∫ b_j = −∫ c_jj = ∞, staged as above.
CriterionReport diagonal_ray_criterion(const SystemSpec& sys, int j, double horizon,
                                       const CriterionOptions& opt = {});

/// Full pipeline through the drift factorization: classify solvability,
/// reduce channel j to its scalar test equation, and apply the window or
/// ray criterion. Unsolvability yields Inconclusive with the reason.
CriterionReport factorization_route_window(const SystemSpec& sys, int j, Window w,
                                           const CriterionOptions& opt = {});
CriterionReport factorization_route_ray(const SystemSpec& sys, int j, double horizon,
                                        const CriterionOptions& opt = {});

/// Full pipeline through the unitary diagonalization: eigenvalue path,
/// guarded reduction, scalar system criterion. Negative eigenvalues of B or
/// a discontinuous chi yield Inconclusive with diagnostics.
CriterionReport unitary_route_window(const SystemSpec& sys, int j, Window w,
                                     const CriterionOptions& opt = {});
CriterionReport unitary_route_ray(const SystemSpec& sys, int j, double horizon,
                                  const CriterionOptions& opt = {});

}  // namespace hamosc
