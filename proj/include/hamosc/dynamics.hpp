#pragma once

#include <memory>
#include <optional>
#include <ostream>

#include "hamosc/ode.hpp"
#include "hamosc/reduction.hpp"
#include "hamosc/system.hpp"
#include "hamosc/window.hpp"

namespace hamosc {

struct MatrixRiccatiPath;

/// A numerically integrated matrix solution pair (Phi, Psi) with the traces
/// used by oscillation detection: the smallest singular value of Phi and the
/// conjoinedness defect ‖Phi*Psi − Psi*Phi‖_F.
struct Trajectory {
    int n = 0;
    std::vector<double> t;
    std::vector<Matrix> Phi, Psi;
    std::vector<double> sigma_min;
    std::vector<double> conjoined_defect;
    DenseOutput dense;
    OdeTolerances tolerances;
    // Set on trajectories reconstructed from a Riccati path: the dense state
    // then holds Phi alone and Psi(t) = Z(t)·Phi(t).
    std::shared_ptr<const MatrixRiccatiPath> psi_from;

    std::pair<Matrix, Matrix> at(double time) const;
    double sigma_min_at(double time) const;
    double max_relative_defect() const;

    /// CSV: t, Re/Im of each Phi and Psi entry, sigma_min, conjoined_defect.
    void write_csv(std::ostream& os) const;
};

Trajectory integrate_hamiltonian(const SystemSpec& sys, const Matrix& Phi0, const Matrix& Psi0,
                                 double t_begin, double t_end, OdeTolerances tol = {});

struct ZeroEvent {
    double t = 0.0;
    double sigma = 0.0;  // sigma_min attained at the refined minimum
};

struct ZeroDetection {
    std::vector<ZeroEvent> zeros;
    std::vector<ZeroEvent> near;  // refined local minima above the floor but within 1e3 of it
    double threshold = 0.0;
};

/// Scans sigma_min(Phi(t)) on the dense output over the window, refines each
/// local minimum by golden-section search and declares a zero where the
/// refined minimum falls below the threshold. The default threshold is
/// 1e-7 times the median sampled sigma_min, floored at ten times the
/// integration noise level so that the detector cannot fire on solver error.
ZeroDetection detect_zeros(const Trajectory& traj, Window w, double sigma_tol = -1.0,
                           int scan_samples = 4096);

struct BlowUp {
    double t = 0.0;
    double norm = 0.0;
};

/// Hermitian solution path of Z' = −Z·B·Z − A*·Z − Z·A + C. The state is
/// parametrized by its lower triangle, so the Hermitian invariant holds by
/// construction. Stops with a blow_up record when ‖Z‖_F exceeds blowup_norm
/// or the step size underflows; blow-up is data, not an error.
struct MatrixRiccatiPath {
    int n = 0;
    std::vector<double> t;
    std::vector<Matrix> Z;
    std::optional<BlowUp> blow_up;
    DenseOutput dense;

    Matrix at(double time) const;
    double span_end() const { return t.back(); }
};

MatrixRiccatiPath integrate_matrix_riccati(const SystemSpec& sys, const Matrix& Z0, double t_begin,
                                           double t_end, double blowup_norm = 1e8,
                                           OdeTolerances tol = {});

/// Scalar path of y' + f·y² + g·y + h = 0.
struct ScalarRiccatiPath {
    std::vector<double> t;
    std::vector<double> y;
    std::optional<BlowUp> blow_up;
    DenseOutput dense;

    double at(double time) const;
    double begin() const { return t.front(); }
    double span_end() const { return t.back(); }
};

ScalarRiccatiPath integrate_scalar_riccati(const ScalarFn& f, const ScalarFn& g, const ScalarFn& h,
                                           double y0, double t_begin, double t_end,
                                           double blowup_norm = 1e8, OdeTolerances tol = {});

/// A sampled scalar function with an evaluator.
struct ScalarTrace {
    std::vector<double> t;
    std::vector<double> value;
    ScalarFn eval;
};

/// phi(t) = phi1 · exp ∫ (y + p) from the start of the path, by cumulative
/// quadrature on the path's dense output.
ScalarTrace riccati_to_second_order(const ScalarRiccatiPath& y, const ScalarFn& p, double phi1);

/// Integrates X' = [A + B·Z(t)]·X from the start of the Riccati path with
/// X(t1) = Phi1 and sets Psi = Z·Phi. Throws StepSizeUnderflow.
Trajectory riccati_to_hamiltonian(const MatrixRiccatiPath& Z, const SystemSpec& sys,
                                  const Matrix& Phi1);

/// Two-dimensional scalar system trajectory with sign-change zero detection
/// on the first component.
struct ScalarTrajectory {
    std::vector<double> t;
    std::vector<double> phi, psi;
    std::vector<double> zeros;
    DenseOutput dense;

    std::pair<double, double> at(double time) const;
};

ScalarTrajectory integrate_scalar_system(const ScalarSystem2x2& s, double phi0, double psi0,
                                         double t_begin, double t_end, OdeTolerances tol = {});

}  // namespace hamosc
