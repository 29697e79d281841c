#include "hamosc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "hamosc/quadrature.hpp"

namespace hamosc {

namespace {

// State layout for the matrix pair: [Re Phi, Im Phi, Re Psi, Im Psi],
// each block column-major of length n².
void pack_pair(const Matrix& Phi, const Matrix& Psi, StateVector& y) {
    const Eigen::Index n = Phi.rows();
    const Eigen::Index nn = n * n;
    y.resize(4 * nn);
    for (Eigen::Index j = 0, k = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i, ++k) {
            y(k) = Phi(i, j).real();
            y(nn + k) = Phi(i, j).imag();
            y(2 * nn + k) = Psi(i, j).real();
            y(3 * nn + k) = Psi(i, j).imag();
        }
}

void unpack_pair(const StateVector& y, int n, Matrix& Phi, Matrix& Psi) {
    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    Phi.resize(n, n);
    Psi.resize(n, n);
    for (Eigen::Index j = 0, k = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i, ++k) {
            Phi(i, j) = {y(k), y(nn + k)};
            Psi(i, j) = {y(2 * nn + k), y(3 * nn + k)};
        }
}

// Single complex matrix: [Re, Im].
void pack_single(const Matrix& M, StateVector& y) {
    const Eigen::Index n = M.rows();
    const Eigen::Index nn = n * n;
    y.resize(2 * nn);
    for (Eigen::Index j = 0, k = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i, ++k) {
            y(k) = M(i, j).real();
            y(nn + k) = M(i, j).imag();
        }
}

void unpack_single(const StateVector& y, int n, Matrix& M) {
    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    M.resize(n, n);
    for (Eigen::Index j = 0, k = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i, ++k) M(i, j) = {y(k), y(nn + k)};
}

// Hermitian matrix parametrized by its lower triangle: n diagonal reals,
// then (re, im) of each strictly lower entry. Keeps the Hermitian invariant
// exact along the integration.
void pack_hermitian(const Matrix& Z, StateVector& y) {
    const Eigen::Index n = Z.rows();
    y.resize(n * n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) y(k++) = Z(i, i).real();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) {
            y(k++) = Z(i, j).real();
            y(k++) = Z(i, j).imag();
        }
}

void unpack_hermitian(const StateVector& y, int n, Matrix& Z) {
    Z.resize(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) Z(i, i) = y(k++);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) {
            std::complex<double> v{y(k), y(k + 1)};
            k += 2;
            Z(i, j) = v;
            Z(j, i) = std::conj(v);
        }
}

double smallest_singular_value(const Matrix& M) {
    if (M.rows() == 1) return std::abs(M(0, 0));
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues().minCoeff();
}

double conjoined_defect_of(const Matrix& Phi, const Matrix& Psi) {
    return (Phi.adjoint() * Psi - Psi.adjoint() * Phi).norm();
}

// Golden-section minimization; returns (argmin, min value).
std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo, double hi,
                                     int iters = 80) {
    constexpr double gr = 0.6180339887498949;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iters && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    double tm = 0.5 * (lo + hi);
    return {tm, f(tm)};
}

void write_double(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace

std::pair<Matrix, Matrix> Trajectory::at(double time) const {
    StateVector y = dense.eval(time);
    Matrix P, Q;
    if (psi_from) {
        unpack_single(y, n, P);
        Q = psi_from->at(time) * P;
    } else {
        unpack_pair(y, n, P, Q);
    }
    return {std::move(P), std::move(Q)};
}

double Trajectory::sigma_min_at(double time) const {
    StateVector y = dense.eval(time);
    Matrix P, Q;
    if (psi_from)
        unpack_single(y, n, P);
    else
        unpack_pair(y, n, P, Q);
    return smallest_singular_value(P);
}

double Trajectory::max_relative_defect() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        double scale = 1.0 + Phi[k].norm() * Psi[k].norm();
        worst = std::max(worst, conjoined_defect[k] / scale);
    }
    return worst;
}

void Trajectory::write_csv(std::ostream& os) const {
    os << "t";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            os << ",Phi_" << i << "_" << j << "_re,Phi_" << i << "_" << j << "_im";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            os << ",Psi_" << i << "_" << j << "_re,Psi_" << i << "_" << j << "_im";
    os << ",sigma_min,conjoined_defect\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        write_double(os, t[k]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                os << ',';
                write_double(os, Phi[k](i, j).real());
                os << ',';
                write_double(os, Phi[k](i, j).imag());
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                os << ',';
                write_double(os, Psi[k](i, j).real());
                os << ',';
                write_double(os, Psi[k](i, j).imag());
            }
        os << ',';
        write_double(os, sigma_min[k]);
        os << ',';
        write_double(os, conjoined_defect[k]);
        os << '\n';
    }
}

Trajectory integrate_hamiltonian(const SystemSpec& sys, const Matrix& Phi0, const Matrix& Psi0,
                                 double t_begin, double t_end, OdeTolerances tol) {
    const int n = sys.n();
    if (Phi0.rows() != n || Phi0.cols() != n || Psi0.rows() != n || Psi0.cols() != n)
        throw DimensionMismatch("initial data must be n x n");
    if (!(tol.rtol > 0.0) || !(tol.atol > 0.0)) throw Error("tolerances must be positive");

    MatrixFn A = sys.A_fn(), B = sys.B_fn(), C = sys.C_fn();
    Matrix Phi(n, n), Psi(n, n), dPhi(n, n), dPsi(n, n);
    OdeRhs rhs = [&](double t, const StateVector& y, StateVector& dy) {
        unpack_pair(y, n, Phi, Psi);
        Matrix At = A(t);
        dPhi = At * Phi + B(t) * Psi;
        dPsi = C(t) * Phi - At.adjoint() * Psi;
        pack_pair(dPhi, dPsi, dy);
    };

    StateVector y0;
    pack_pair(Phi0, Psi0, y0);
    OdeResult res = integrate_dopri5(rhs, t_begin, t_end, std::move(y0), tol);
    if (!res.completed)
        throw StepSizeUnderflow(res.reached, "integration stalled at t = " +
                                                 std::to_string(res.reached) + " (" +
                                                 res.stop_reason + ")");

    Trajectory traj;
    traj.n = n;
    traj.tolerances = tol;
    traj.t = std::move(res.t);
    traj.dense = std::move(res.dense);
    for (const StateVector& y : res.y) {
        Matrix P, Q;
        unpack_pair(y, n, P, Q);
        traj.sigma_min.push_back(smallest_singular_value(P));
        traj.conjoined_defect.push_back(conjoined_defect_of(P, Q));
        traj.Phi.push_back(std::move(P));
        traj.Psi.push_back(std::move(Q));
    }
    return traj;
}

ZeroDetection detect_zeros(const Trajectory& traj, Window w, double sigma_tol, int scan_samples) {
    if (traj.dense.empty()) throw OutOfDomain("detect_zeros: empty trajectory");
    double lo = traj.dense.begin(), hi = traj.dense.end();
    double slack = 1e-9 * std::max(1.0, hi - lo);
    if (w.a < lo - slack || w.b > hi + slack)
        throw OutOfDomain("detect_zeros: window not covered by the trajectory");

    const int K = std::max(16, scan_samples);
    std::vector<double> ts(static_cast<std::size_t>(K) + 1), sig(ts.size());
    std::vector<double> norms(ts.size());
    for (int i = 0; i <= K; ++i) {
        double t = w.a + (w.b - w.a) * i / K;
        ts[static_cast<std::size_t>(i)] = t;
        auto [P, Q] = traj.at(t);
        (void)Q;
        sig[static_cast<std::size_t>(i)] = smallest_singular_value(P);
        norms[static_cast<std::size_t>(i)] = P.norm();
    }

    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    double med_sigma = median(sig);
    double med_norm = median(norms);
    // The detection floor cannot sit below the integrator's own noise.
    double noise = 10.0 * (traj.tolerances.atol + traj.tolerances.rtol * med_norm);
    double threshold = sigma_tol > 0.0 ? sigma_tol : std::max(1e-7 * med_sigma, noise);

    ZeroDetection out;
    out.threshold = threshold;
    auto sigma_at = [&traj](double t) { return traj.sigma_min_at(t); };

    std::vector<ZeroEvent> candidates;
    auto refine = [&](std::size_t ilo, std::size_t ihi) {
        auto [tm, sm] = golden_min(sigma_at, ts[ilo], ts[ihi]);
        candidates.push_back({tm, sm});
    };
    for (std::size_t i = 1; i + 1 < sig.size(); ++i) {
        bool left = sig[i] < sig[i - 1] || (sig[i] == sig[i - 1] && sig[i] < sig[i + 1]);
        bool right = sig[i] < sig[i + 1] || (sig[i] == sig[i + 1] && sig[i] < sig[i - 1]);
        if (left && right) refine(i - 1, i + 1);
    }
    if (sig.front() < sig[1]) refine(0, 1);
    if (sig.back() < sig[sig.size() - 2]) refine(sig.size() - 2, sig.size() - 1);

    std::sort(candidates.begin(), candidates.end(),
              [](const ZeroEvent& x, const ZeroEvent& y) { return x.t < y.t; });
    double merge_tol = (w.b - w.a) / (2.0 * K);
    std::vector<ZeroEvent> merged;
    for (const ZeroEvent& e : candidates) {
        if (!merged.empty() && e.t - merged.back().t < merge_tol) {
            if (e.sigma < merged.back().sigma) merged.back() = e;
        } else {
            merged.push_back(e);
        }
    }
    for (const ZeroEvent& e : merged) {
        if (e.sigma <= threshold)
            out.zeros.push_back(e);
        else if (e.sigma <= 1e3 * threshold)
            out.near.push_back(e);
    }
    return out;
}

Matrix MatrixRiccatiPath::at(double time) const {
    StateVector y = dense.eval(time);
    Matrix Zt;
    unpack_hermitian(y, n, Zt);
    return Zt;
}

MatrixRiccatiPath integrate_matrix_riccati(const SystemSpec& sys, const Matrix& Z0, double t_begin,
                                           double t_end, double blowup_norm, OdeTolerances tol) {
    const int n = sys.n();
    if (Z0.rows() != n || Z0.cols() != n) throw DimensionMismatch("Z0 must be n x n");
    if (!is_hermitian(Z0, 1e-10)) throw Error("integrate_matrix_riccati: Z0 is not Hermitian");

    MatrixFn A = sys.A_fn(), B = sys.B_fn(), C = sys.C_fn();
    Matrix Z(n, n), dZ(n, n);
    OdeRhs rhs = [&](double t, const StateVector& y, StateVector& dy) {
        unpack_hermitian(y, n, Z);
        Matrix At = A(t);
        dZ = -(Z * B(t) * Z) - At.adjoint() * Z - Z * At + C(t);
        dZ = hermitian_part(dZ);
        pack_hermitian(dZ, dy);
    };

    Matrix Zt(n, n);
    auto stop = [&](double, const StateVector& y) {
        unpack_hermitian(y, n, Zt);
        return Zt.norm() > blowup_norm;
    };

    StateVector y0;
    pack_hermitian(hermitian_part(Z0), y0);
    OdeResult res = integrate_dopri5(rhs, t_begin, t_end, std::move(y0), tol, stop);

    MatrixRiccatiPath path;
    path.n = n;
    path.t = std::move(res.t);
    path.dense = std::move(res.dense);
    for (const StateVector& y : res.y) {
        Matrix Zk;
        unpack_hermitian(y, n, Zk);
        path.Z.push_back(std::move(Zk));
    }
    if (!res.completed) path.blow_up = BlowUp{res.reached, path.Z.back().norm()};
    return path;
}

double ScalarRiccatiPath::at(double time) const { return dense.eval(time)(0); }

ScalarRiccatiPath integrate_scalar_riccati(const ScalarFn& f, const ScalarFn& g, const ScalarFn& h,
                                           double y0, double t_begin, double t_end,
                                           double blowup_norm, OdeTolerances tol) {
    OdeRhs rhs = [&](double t, const StateVector& y, StateVector& dy) {
        double v = y(0);
        dy.resize(1);
        dy(0) = -(f(t) * v * v + g(t) * v + h(t));
    };
    auto stop = [&](double, const StateVector& y) { return std::abs(y(0)) > blowup_norm; };

    StateVector s0(1);
    s0(0) = y0;
    OdeResult res = integrate_dopri5(rhs, t_begin, t_end, std::move(s0), tol, stop);

    ScalarRiccatiPath path;
    path.t = std::move(res.t);
    path.dense = std::move(res.dense);
    for (const StateVector& y : res.y) path.y.push_back(y(0));
    if (!res.completed) path.blow_up = BlowUp{res.reached, std::abs(path.y.back())};
    return path;
}

ScalarTrace riccati_to_second_order(const ScalarRiccatiPath& y, const ScalarFn& p, double phi1) {
    double t1 = y.t.front(), t2 = y.t.back();
    auto integrand = [&y, p](double tau) { return y.at(tau) + p(tau); };
    auto ci = std::make_shared<CumulativeIntegral>(integrand, t1, t2, 1e-10);
    ScalarTrace tr;
    tr.t = y.t;
    for (double tk : tr.t) tr.value.push_back(phi1 * std::exp(ci->at(tk)));
    tr.eval = [ci, phi1](double t) { return phi1 * std::exp(ci->at(t)); };
    return tr;
}

Trajectory riccati_to_hamiltonian(const MatrixRiccatiPath& Z, const SystemSpec& sys,
                                  const Matrix& Phi1) {
    const int n = sys.n();
    if (Phi1.rows() != n || Phi1.cols() != n) throw DimensionMismatch("Phi1 must be n x n");

    MatrixFn A = sys.A_fn(), B = sys.B_fn();
    Matrix P(n, n), dP(n, n);
    OdeRhs rhs = [&](double t, const StateVector& y, StateVector& dy) {
        unpack_single(y, n, P);
        dP = (A(t) + B(t) * Z.at(t)) * P;
        pack_single(dP, dy);
    };

    StateVector y0;
    pack_single(Phi1, y0);
    OdeResult res = integrate_dopri5(rhs, Z.t.front(), Z.t.back(), std::move(y0));
    if (!res.completed)
        throw StepSizeUnderflow(res.reached, "factor integration stalled at t = " +
                                                 std::to_string(res.reached));

    Trajectory traj;
    traj.n = n;
    traj.t = std::move(res.t);
    traj.dense = std::move(res.dense);
    traj.psi_from = std::make_shared<MatrixRiccatiPath>(Z);
    for (std::size_t k = 0; k < res.y.size(); ++k) {
        Matrix Pk;
        unpack_single(res.y[k], n, Pk);
        Matrix Qk = traj.psi_from->at(traj.t[k]) * Pk;
        traj.sigma_min.push_back(smallest_singular_value(Pk));
        traj.conjoined_defect.push_back(conjoined_defect_of(Pk, Qk));
        traj.Phi.push_back(std::move(Pk));
        traj.Psi.push_back(std::move(Qk));
    }
    return traj;
}

std::pair<double, double> ScalarTrajectory::at(double time) const {
    StateVector y = dense.eval(time);
    return {y(0), y(1)};
}

ScalarTrajectory integrate_scalar_system(const ScalarSystem2x2& s, double phi0, double psi0,
                                         double t_begin, double t_end, OdeTolerances tol) {
    OdeRhs rhs = [&](double t, const StateVector& y, StateVector& dy) {
        dy.resize(2);
        dy(0) = s.p11(t) * y(0) + s.p12(t) * y(1);
        dy(1) = s.p21(t) * y(0) + s.p22(t) * y(1);
    };
    StateVector y0(2);
    y0 << phi0, psi0;
    OdeResult res = integrate_dopri5(rhs, t_begin, t_end, std::move(y0), tol);
    if (!res.completed)
        throw StepSizeUnderflow(res.reached, "scalar system integration stalled at t = " +
                                                 std::to_string(res.reached));

    ScalarTrajectory traj;
    traj.t = std::move(res.t);
    traj.dense = std::move(res.dense);
    for (const StateVector& y : res.y) {
        traj.phi.push_back(y(0));
        traj.psi.push_back(y(1));
    }

    // Sign-change zero detection on phi over the dense output.
    auto phi_at = [&traj](double t) { return traj.dense.eval(t)(0); };
    for (std::size_t k = 0; k + 1 < traj.t.size(); ++k) {
        double a = traj.t[k], b = traj.t[k + 1];
        const int sub = 8;
        double prev_t = a, prev_v = phi_at(a);
        for (int i = 1; i <= sub; ++i) {
            double tt = a + (b - a) * i / sub;
            double vv = phi_at(tt);
            if (prev_v == 0.0) {
                if (traj.zeros.empty() || std::abs(traj.zeros.back() - prev_t) > 1e-12)
                    traj.zeros.push_back(prev_t);
            } else if ((prev_v < 0.0) != (vv < 0.0) && vv != 0.0) {
                double lo = prev_t, hi = tt, flo = prev_v;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                    double mid = 0.5 * (lo + hi);
                    double fm = phi_at(mid);
                    if (fm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                traj.zeros.push_back(0.5 * (lo + hi));
            }
            prev_t = tt;
            prev_v = vv;
        }
    }
    if (!traj.phi.empty() && traj.phi.back() == 0.0) traj.zeros.push_back(traj.t.back());
    return traj;
}

}  // namespace hamosc
