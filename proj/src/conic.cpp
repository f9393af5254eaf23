#include "lpvsyn/conic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <cstdio>
#include <cstdlib>

namespace lpvsyn {

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIter: return "maxiter";
    }
    return "?";
}

void ConicProgram::validate() const {
    if (num_vars <= 0) throw IllFormedProgram("program has no variables");
    if (objective.size() != num_vars) throw IllFormedProgram("objective size mismatch");
    if (!objective.allFinite()) throw IllFormedProgram("non-finite objective");
    if (Aeq.rows() > 0) {
        if (Aeq.cols() != num_vars) throw IllFormedProgram("equality column count mismatch");
        if (beq.size() != Aeq.rows()) throw IllFormedProgram("equality rhs size mismatch");
        if (!beq.allFinite()) throw IllFormedProgram("non-finite equality rhs");
    }
    for (const ConeBlock& cb : cones) {
        if (cb.dim() < 2) throw IllFormedProgram("cone dimension must be >= 2");
        std::vector<int> idx = cb.indices;
        std::sort(idx.begin(), idx.end());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= num_vars) throw IllFormedProgram("cone index out of range");
            if (i && idx[i] == idx[i - 1])
                throw IllFormedProgram("variable repeated inside one cone block");
        }
    }
}

void ConicProgram::dump(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(17);
    out << "vars " << num_vars << "\n";
    for (int i = 0; i < num_vars; ++i)
        if (objective[i] != 0.0) out << "obj " << i << " " << objective[i] << "\n";
    for (int r = 0; r < Aeq.rows(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Aeq, r); it; ++it)
            out << "eq " << r << " " << it.col() << " " << it.value() << "\n";
        out << "rhs " << r << " " << beq[r] << "\n";
    }
    for (std::size_t k = 0; k < cones.size(); ++k) {
        out << "cone " << k;
        for (int i : cones[k].indices) out << " " << i;
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Core solver: min c'x  s.t.  A x = b,  G x + s = h,  s in K,
// K = R+^l x SOC(q_1) x ... x SOC(q_N). Homogeneous self-dual embedding with
// Nesterov-Todd scaling and Mehrotra predictor-corrector.
// ---------------------------------------------------------------------------

namespace {

struct CoreProblem {
    int n = 0;  // variables
    int l = 0;  // orthant rows (internal use only)
    std::vector<int> soc_dims;
    Eigen::VectorXd c;
    Eigen::MatrixXd A;  // p x n
    Eigen::VectorXd b;
    Eigen::MatrixXd G;  // m x n
    Eigen::VectorXd h;

    int p() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(G.rows()); }
    int degree() const { return l + static_cast<int>(soc_dims.size()); }
};

struct CoreSolution {
    SolveStatus status = SolveStatus::MaxIter;
    Eigen::VectorXd x, y, z, s;
    double tau = 1.0, kappa = 1.0;
    int iterations = 0;
    double pres = 0.0, dres = 0.0, gap = 0.0;
};

// Nesterov-Todd scaling state for one SOC block plus the orthant part.
struct Scaling {
    Eigen::VectorXd orth_w;                 // sqrt(s_i/z_i), size l
    std::vector<double> eta;                // per SOC block
    std::vector<Eigen::VectorXd> wbar;      // per SOC block, normalized point
    Eigen::VectorXd lambda;                 // scaled variable, size m
};

double soc_min_eig(const Eigen::Ref<const Eigen::VectorXd>& u) {
    return u[0] - u.tail(u.size() - 1).norm();
}

// P(u) v for the hyperbolic representation used by the NT scaling.
Eigen::VectorXd soc_apply(const Eigen::Ref<const Eigen::VectorXd>& u,
                          const Eigen::Ref<const Eigen::VectorXd>& v) {
    const auto q = u.size();
    Eigen::VectorXd out(q);
    const double u1v1 = u.tail(q - 1).dot(v.tail(q - 1));
    out[0] = u[0] * v[0] + u1v1;
    out.tail(q - 1) = v[0] * u.tail(q - 1) + v.tail(q - 1) +
                      (u1v1 / (1.0 + u[0])) * u.tail(q - 1);
    return out;
}

Eigen::VectorXd soc_reflect(const Eigen::Ref<const Eigen::VectorXd>& u) {
    Eigen::VectorXd r = -u;
    r[0] = u[0];
    return r;
}

// Jordan product u o v = (u'v, u0 v1 + v0 u1).
Eigen::VectorXd jordan_mul(const Eigen::Ref<const Eigen::VectorXd>& u,
                           const Eigen::Ref<const Eigen::VectorXd>& v) {
    const auto q = u.size();
    Eigen::VectorXd out(q);
    out[0] = u.dot(v);
    out.tail(q - 1) = u[0] * v.tail(q - 1) + v[0] * u.tail(q - 1);
    return out;
}

// Solve lambda o x = r.
Eigen::VectorXd jordan_div(const Eigen::Ref<const Eigen::VectorXd>& lam,
                           const Eigen::Ref<const Eigen::VectorXd>& r) {
    const auto q = lam.size();
    const double det = lam[0] * lam[0] - lam.tail(q - 1).squaredNorm();
    Eigen::VectorXd x(q);
    x[0] = (lam[0] * r[0] - lam.tail(q - 1).dot(r.tail(q - 1))) / det;
    x.tail(q - 1) = (r.tail(q - 1) - x[0] * lam.tail(q - 1)) / lam[0];
    return x;
}

// Largest step alpha with u + alpha d staying in the cone (capped).
double step_to_boundary_soc(const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::VectorXd>& d, double cap) {
    const auto q = u.size();
    const double a = d[0] * d[0] - d.tail(q - 1).squaredNorm();
    const double b2 = 2.0 * (u[0] * d[0] - u.tail(q - 1).dot(d.tail(q - 1)));
    const double c0 = u[0] * u[0] - u.tail(q - 1).squaredNorm();
    if (d[0] >= 0 && a >= 0) return cap;  // direction inside the cone
    double best = cap;
    auto consider = [&](double r) {
        if (r > 1e-16 && u[0] + r * d[0] >= -1e-12 * std::abs(u[0])) best = std::min(best, r);
    };
    if (std::abs(a) < 1e-300) {
        if (b2 < 0) consider(-c0 / b2);
    } else {
        const double disc = b2 * b2 - 4.0 * a * c0;
        if (disc >= 0) {
            const double sq = std::sqrt(disc);
            const double qq = -0.5 * (b2 + (b2 >= 0 ? sq : -sq));
            if (qq != 0.0) consider(c0 / qq);
            consider(qq / a);
            if (qq == 0.0 && a != 0.0) consider(0.0);  // grazing at origin
        }
    }
    return best;
}

double step_to_boundary_scalar(double u, double d, double cap) {
    if (d >= 0) return cap;
    return std::min(cap, -u / d);
}

class CoreIpm {
public:
    CoreIpm(const CoreProblem& prob, double tol, int maxiter)
        : P(prob), tol_(tol), maxiter_(maxiter) {}

    CoreSolution run();

private:
    const CoreProblem& P;
    double tol_;
    int maxiter_;

    Scaling sc_;
    Eigen::MatrixXd kkt_;  // (n+p) x (n+p)
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::MatrixXd Wi2G_;  // W^{-2} G, reused between the two solves

    void set_identity_scaling();
    void update_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z);
    Eigen::VectorXd apply_W(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_Winv(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_Winv2(const Eigen::VectorXd& v) const;
    void factor_kkt();
    // Solves the 3x3 system with rows (A' dy + G' dz = r1, A dx = r2,
    // G dx - W^2 dz = r3) for (dx, dy, dz).
    void solve_kkt(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                   const Eigen::VectorXd& r3, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                   Eigen::VectorXd& dz) const;

    double min_cone_eig(const Eigen::VectorXd& v) const;
    Eigen::VectorXd cone_identity() const;
    double step_to_boundary(const Eigen::VectorXd& s, const Eigen::VectorXd& ds,
                            const Eigen::VectorXd& z, const Eigen::VectorXd& dz) const;
};

void CoreIpm::set_identity_scaling() {
    sc_.orth_w = Eigen::VectorXd::Ones(P.l);
    sc_.lambda = Eigen::VectorXd::Ones(P.m());
    sc_.eta.assign(P.soc_dims.size(), 1.0);
    sc_.wbar.resize(P.soc_dims.size());
    for (std::size_t kb = 0; kb < P.soc_dims.size(); ++kb) {
        sc_.wbar[kb] = Eigen::VectorXd::Zero(P.soc_dims[kb]);
        sc_.wbar[kb][0] = 1.0;  // P(e) = I
    }
}

void CoreIpm::update_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
    sc_.orth_w.resize(P.l);
    sc_.lambda.resize(P.m());
    for (int i = 0; i < P.l; ++i) {
        sc_.orth_w[i] = std::sqrt(s[i] / z[i]);
        sc_.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    sc_.eta.assign(P.soc_dims.size(), 1.0);
    sc_.wbar.assign(P.soc_dims.size(), Eigen::VectorXd());
    int off = P.l;
    for (std::size_t kb = 0; kb < P.soc_dims.size(); ++kb) {
        const int q = P.soc_dims[kb];
        const auto sb = s.segment(off, q);
        const auto zb = z.segment(off, q);
        const double rs = sb[0] * sb[0] - sb.tail(q - 1).squaredNorm();
        const double rz = zb[0] * zb[0] - zb.tail(q - 1).squaredNorm();
        const Eigen::VectorXd sbar = sb / std::sqrt(rs);
        const Eigen::VectorXd zbar = zb / std::sqrt(rz);
        const double gamma =
            std::sqrt(0.5 * (1.0 + sbar[0] * zbar[0] + sbar.tail(q - 1).dot(zbar.tail(q - 1))));
        Eigen::VectorXd wb(q);
        wb[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
        wb.tail(q - 1) = (sbar.tail(q - 1) - zbar.tail(q - 1)) / (2.0 * gamma);
        sc_.wbar[kb] = wb;
        sc_.eta[kb] = std::pow(rs / rz, 0.25);
        sc_.lambda.segment(off, q) = sc_.eta[kb] * soc_apply(wb, zb);
        off += q;
    }
}

Eigen::VectorXd CoreIpm::apply_W(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(P.m());
    out.head(P.l) = sc_.orth_w.cwiseProduct(v.head(P.l));
    int off = P.l;
    for (std::size_t kb = 0; kb < P.soc_dims.size(); ++kb) {
        const int q = P.soc_dims[kb];
        out.segment(off, q) = sc_.eta[kb] * soc_apply(sc_.wbar[kb], v.segment(off, q));
        off += q;
    }
    return out;
}

Eigen::VectorXd CoreIpm::apply_Winv(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(P.m());
    out.head(P.l) = v.head(P.l).cwiseQuotient(sc_.orth_w);
    int off = P.l;
    for (std::size_t kb = 0; kb < P.soc_dims.size(); ++kb) {
        const int q = P.soc_dims[kb];
        out.segment(off, q) =
            soc_apply(soc_reflect(sc_.wbar[kb]), v.segment(off, q)) / sc_.eta[kb];
        off += q;
    }
    return out;
}

Eigen::VectorXd CoreIpm::apply_Winv2(const Eigen::VectorXd& v) const {
    // W^{-2} v = (1/eta^2) (2 Jw (Jw . v) - J v) per SOC block
    Eigen::VectorXd out(P.m());
    out.head(P.l) = v.head(P.l).cwiseQuotient(sc_.orth_w.cwiseAbs2());
    int off = P.l;
    for (std::size_t kb = 0; kb < P.soc_dims.size(); ++kb) {
        const int q = P.soc_dims[kb];
        const Eigen::VectorXd jw = soc_reflect(sc_.wbar[kb]);
        const auto vb = v.segment(off, q);
        Eigen::VectorXd jv = -vb;
        jv[0] = vb[0];
        out.segment(off, q) = (2.0 * jw.dot(vb) * jw - jv) / (sc_.eta[kb] * sc_.eta[kb]);
        off += q;
    }
    return out;
}

void CoreIpm::factor_kkt() {
    const int n = P.n, p = P.p();
    Wi2G_.resize(P.m(), n);
    for (int j = 0; j < n; ++j) Wi2G_.col(j) = apply_Winv2(P.G.col(j));
    kkt_.setZero(n + p, n + p);
    kkt_.topLeftCorner(n, n) = P.G.transpose() * Wi2G_;
    const double reg = 1e-12 * std::max(1.0, kkt_.topLeftCorner(n, n).diagonal().maxCoeff());
    kkt_.topLeftCorner(n, n).diagonal().array() += reg;
    if (p > 0) {
        kkt_.topRightCorner(n, p) = P.A.transpose();
        kkt_.bottomLeftCorner(p, n) = P.A;
        kkt_.bottomRightCorner(p, p).diagonal().array() -= reg;
    }
    lu_.compute(kkt_);
}

void CoreIpm::solve_kkt(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
                        const Eigen::VectorXd& r3, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                        Eigen::VectorXd& dz) const {
    const int n = P.n, p = P.p();
    Eigen::VectorXd rhs(n + p);
    rhs.head(n) = r1 + Wi2G_.transpose() * r3;
    rhs.tail(p) = r2;
    Eigen::VectorXd sol = lu_.solve(rhs);
    // iterative refinement against the unregularized reduced system; the
    // normal-equations form squares the conditioning, so several passes are
    // needed near the central-path boundary
    for (int pass = 0; pass < 3; ++pass) {
        Eigen::VectorXd resid(n + p);
        resid.head(n) = rhs.head(n) - P.G.transpose() * apply_Winv2(P.G * sol.head(n));
        if (p > 0) {
            resid.head(n) -= P.A.transpose() * sol.tail(p);
            resid.tail(p) = rhs.tail(p) - P.A * sol.head(n);
        }
        if (resid.lpNorm<Eigen::Infinity>() <=
            1e-14 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
            break;
        sol += lu_.solve(resid);
    }
    dx = sol.head(n);
    dy = sol.tail(p);
    dz = apply_Winv2(P.G * dx - r3);
}

double CoreIpm::min_cone_eig(const Eigen::VectorXd& v) const {
    double me = std::numeric_limits<double>::infinity();
    for (int i = 0; i < P.l; ++i) me = std::min(me, v[i]);
    int off = P.l;
    for (int q : P.soc_dims) {
        me = std::min(me, soc_min_eig(v.segment(off, q)));
        off += q;
    }
    return me;
}

Eigen::VectorXd CoreIpm::cone_identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(P.m());
    e.head(P.l).setOnes();
    int off = P.l;
    for (int q : P.soc_dims) {
        e[off] = 1.0;
        off += q;
    }
    return e;
}

double CoreIpm::step_to_boundary(const Eigen::VectorXd& s, const Eigen::VectorXd& ds,
                                 const Eigen::VectorXd& z, const Eigen::VectorXd& dz) const {
    double alpha = 1e10;
    for (int i = 0; i < P.l; ++i) {
        alpha = step_to_boundary_scalar(s[i], ds[i], alpha);
        alpha = step_to_boundary_scalar(z[i], dz[i], alpha);
    }
    int off = P.l;
    for (int q : P.soc_dims) {
        alpha = step_to_boundary_soc(s.segment(off, q), ds.segment(off, q), alpha);
        alpha = step_to_boundary_soc(z.segment(off, q), dz.segment(off, q), alpha);
        off += q;
    }
    return alpha;
}

CoreSolution CoreIpm::run() {
    const int n = P.n, p = P.p(), m = P.m();
    CoreSolution out;

    const double normb = std::max(1.0, P.b.size() ? P.b.norm() : 0.0);
    const double normh = std::max(1.0, P.h.norm());
    const double normc = std::max(1.0, P.c.norm());

    // init: identity scaling, two KKT solves, shift into the cone interior
    set_identity_scaling();
    factor_kkt();
    Eigen::VectorXd x, y, z, s, dx, dy, dz;
    solve_kkt(Eigen::VectorXd::Zero(n), P.b, P.h, dx, dy, dz);
    x = dx;
    Eigen::VectorXd stilde = -dz;  // h - Gx in the scaled metric
    const Eigen::VectorXd e = cone_identity();
    const double alpha_p = -min_cone_eig(stilde);
    s = (alpha_p < 0) ? stilde : (stilde + (1.0 + alpha_p) * e).eval();
    solve_kkt(-P.c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m), dx, dy, dz);
    y = dy;
    Eigen::VectorXd ztilde = dz;
    const double alpha_d = -min_cone_eig(ztilde);
    z = (alpha_d < 0) ? ztilde : (ztilde + (1.0 + alpha_d) * e).eval();

    double tau = 1.0, kappa = 1.0;
    double mu = (s.dot(z) + tau * kappa) / (P.degree() + 1);

    // best iterate seen so far, by the worst of the three relative metrics;
    // restored when the iteration stalls or runs out
    double best_merit = std::numeric_limits<double>::infinity();
    Eigen::VectorXd bx = x, by_ = y, bz = z, bs = s;
    double btau = tau, bkappa = kappa, bpres = 1e300, bdres = 1e300, bgap = 1e300;

    for (int iter = 0; iter <= maxiter_; ++iter) {
        // residuals of the homogeneous model
        const Eigen::VectorXd r_dual = (p ? (P.A.transpose() * y).eval()
                                          : Eigen::VectorXd::Zero(n)) +
                                       P.G.transpose() * z + P.c * tau;
        const Eigen::VectorXd r_pri1 = p ? (P.A * x - P.b * tau).eval() : Eigen::VectorXd();
        const Eigen::VectorXd r_pri2 = P.G * x + s - P.h * tau;
        const double cx = P.c.dot(x), by = p ? P.b.dot(y) : 0.0, hz = P.h.dot(z);
        const double r_tau = cx + by + hz + kappa;

        const double pres =
            std::sqrt((p ? r_pri1.squaredNorm() : 0.0) + r_pri2.squaredNorm()) / tau /
            std::max(normb, normh);
        const double dres = r_dual.norm() / tau / normc;
        const double pcost = cx / tau, dcost = -(by + hz) / tau;
        const double gap = s.dot(z) / (tau * tau);
        const double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});

        out.iterations = iter;
        out.pres = pres;
        out.dres = dres;
        out.gap = gap;

        if (std::getenv("LPVSYN_CONIC_TRACE"))
            std::fprintf(stderr,
                         "it %3d tau %.3e kap %.3e mu %.3e pres %.3e dres %.3e gap %.3e |x| %.2e "
                         "|s| %.2e |z| %.2e\n",
                         iter, tau, kappa, mu, pres, dres, gap, x.norm(), s.norm(), z.norm());

        if (pres <= tol_ && dres <= tol_ && (gap <= tol_ || relgap <= tol_)) {
            out.status = SolveStatus::Optimal;
            out.x = x; out.y = y; out.z = z; out.s = s;
            out.tau = tau; out.kappa = kappa;
            return out;
        }
        const double merit = std::max({pres, dres, std::min(gap, relgap)});
        if (merit < best_merit) {
            best_merit = merit;
            bx = x; by_ = y; bz = z; bs = s;
            btau = tau; bkappa = kappa;
            bpres = pres; bdres = dres; bgap = gap;
        } else if (merit > 1e4 * best_merit) {
            break;  // stalled and drifting; fall back to the best iterate
        }
        // infeasibility certificates
        if (by + hz < 0) {
            const double res_cert = ((p ? (P.A.transpose() * y).eval()
                                        : Eigen::VectorXd::Zero(n)) +
                                     P.G.transpose() * z).norm() / (-(by + hz));
            if (res_cert / normc <= tol_ && min_cone_eig(z) >= -tol_ * z.norm()) {
                out.status = SolveStatus::Infeasible;
                out.x = x; out.y = y / (-(by + hz)); out.z = z / (-(by + hz)); out.s = s;
                out.tau = 0.0; out.kappa = kappa;
                return out;
            }
        }
        if (cx < 0) {
            const double resy = p ? (P.A * x).norm() / (-cx) : 0.0;
            const double resz = (P.G * x + s).norm() / (-cx);
            if (resy / normb <= tol_ && resz / normh <= tol_ &&
                min_cone_eig(s) >= -tol_ * s.norm()) {
                out.status = SolveStatus::Unbounded;
                out.x = x / (-cx); out.y = y; out.z = z; out.s = s / (-cx);
                out.tau = 0.0; out.kappa = kappa;
                return out;
            }
        }
        if (iter == maxiter_) break;

        update_scaling(s, z);
        factor_kkt();

        // constant-part direction, reused by both predictor and corrector
        Eigen::VectorXd dx2, dy2, dz2;
        solve_kkt(-P.c, P.b, P.h, dx2, dy2, dz2);

        const Eigen::VectorXd& lam = sc_.lambda;
        Eigen::VectorXd lam_sq(m);
        {
            lam_sq.head(P.l) = lam.head(P.l).cwiseAbs2();
            int off = P.l;
            for (int q : P.soc_dims) {
                lam_sq.segment(off, q) = jordan_mul(lam.segment(off, q), lam.segment(off, q));
                off += q;
            }
        }

        auto direction = [&](const Eigen::VectorXd& d_s, double d_kt, double rfac,
                             Eigen::VectorXd& ddx, Eigen::VectorXd& ddy, Eigen::VectorXd& ddz,
                             Eigen::VectorXd& dds, double& ddtau, double& ddkappa) {
            Eigen::VectorXd r3 = -rfac * r_pri2 - apply_W(d_s);
            Eigen::VectorXd dx1, dy1, dz1;
            solve_kkt(-rfac * r_dual, p ? (-rfac * r_pri1).eval() : Eigen::VectorXd(), r3,
                      dx1, dy1, dz1);
            const double num = -rfac * r_tau - d_kt / tau -
                               (P.c.dot(dx1) + (p ? P.b.dot(dy1) : 0.0) + P.h.dot(dz1));
            const double den =
                (P.c.dot(dx2) + (p ? P.b.dot(dy2) : 0.0) + P.h.dot(dz2)) - kappa / tau;
            ddtau = num / den;
            ddx = dx1 + ddtau * dx2;
            ddy = p ? (dy1 + ddtau * dy2).eval() : Eigen::VectorXd();
            ddz = dz1 + ddtau * dz2;
            dds = apply_W(d_s) - apply_W(apply_W(ddz));
            ddkappa = (d_kt - kappa * ddtau) / tau;

            if (std::getenv("LPVSYN_CONIC_TRACE")) {
                const double c1 = ((p ? (P.A.transpose() * ddy).eval()
                                      : Eigen::VectorXd::Zero(P.n)) +
                                   P.G.transpose() * ddz + P.c * ddtau + rfac * r_dual)
                                      .norm();
                const double c2 =
                    p ? (P.A * ddx - P.b * ddtau + rfac * r_pri1).norm() : 0.0;
                const double c3 = (P.G * ddx + dds - P.h * ddtau + rfac * r_pri2).norm();
                const double c4 = std::abs(P.c.dot(ddx) + (p ? P.b.dot(ddy) : 0.0) +
                                           P.h.dot(ddz) + ddkappa + rfac * r_tau);
                std::fprintf(stderr, "   dir check: %.2e %.2e %.2e %.2e\n", c1, c2, c3, c4);
            }
        };

        // predictor (affine scaling direction)
        Eigen::VectorXd ds_aff, dz_aff, dx_a, dy_a;
        double dtau_a, dkappa_a;
        {
            Eigen::VectorXd d_s(m);
            d_s.head(P.l) = -lam_sq.head(P.l).cwiseQuotient(lam.head(P.l));
            int off = P.l;
            for (int q : P.soc_dims) {
                d_s.segment(off, q) = jordan_div(lam.segment(off, q),
                                                 (-lam_sq.segment(off, q)).eval());
                off += q;
            }
            direction(d_s, -tau * kappa, 1.0, dx_a, dy_a, dz_aff, ds_aff, dtau_a, dkappa_a);
        }
        double alpha_aff = step_to_boundary(s, ds_aff, z, dz_aff);
        alpha_aff = std::min(alpha_aff, step_to_boundary_scalar(tau, dtau_a, alpha_aff));
        alpha_aff = std::min(alpha_aff, step_to_boundary_scalar(kappa, dkappa_a, alpha_aff));
        alpha_aff = std::min(alpha_aff, 1.0);
        const double sigma = std::pow(1.0 - alpha_aff, 3);

        // corrector (combined direction)
        Eigen::VectorXd dxc, dyc, dzc, dsc;
        double dtau_c, dkappa_c;
        {
            const Eigen::VectorXd ws = apply_Winv(ds_aff);
            const Eigen::VectorXd wz = apply_W(dz_aff);
            Eigen::VectorXd corr(m);
            corr.head(P.l) = ws.head(P.l).cwiseProduct(wz.head(P.l));
            int off = P.l;
            for (int q : P.soc_dims) {
                corr.segment(off, q) = jordan_mul(ws.segment(off, q), wz.segment(off, q));
                off += q;
            }
            Eigen::VectorXd rhs_comp = -lam_sq - corr + sigma * mu * e;
            Eigen::VectorXd d_s(m);
            d_s.head(P.l) = rhs_comp.head(P.l).cwiseQuotient(lam.head(P.l));
            off = P.l;
            for (int q : P.soc_dims) {
                d_s.segment(off, q) = jordan_div(lam.segment(off, q), rhs_comp.segment(off, q));
                off += q;
            }
            const double d_kt = -tau * kappa - dtau_a * dkappa_a + sigma * mu;
            direction(d_s, d_kt, 1.0 - sigma, dxc, dyc, dzc, dsc, dtau_c, dkappa_c);
        }

        double alpha = step_to_boundary(s, dsc, z, dzc);
        alpha = std::min(alpha, step_to_boundary_scalar(tau, dtau_c, alpha));
        alpha = std::min(alpha, step_to_boundary_scalar(kappa, dkappa_c, alpha));
        if (!std::isfinite(alpha)) break;  // direction is garbage; keep the best iterate
        alpha = std::min(1.0, 0.99 * alpha);
        bool stalled = alpha < 1e-14;

        // keep the iterate strictly interior
        for (int back = 0; !stalled && back < 40; ++back) {
            const Eigen::VectorXd s_try = s + alpha * dsc;
            const Eigen::VectorXd z_try = z + alpha * dzc;
            if (min_cone_eig(s_try) > 0 && min_cone_eig(z_try) > 0 &&
                tau + alpha * dtau_c > 0 && kappa + alpha * dkappa_c > 0)
                break;
            alpha *= 0.5;
            stalled = alpha < 1e-14;
        }
        if (stalled) {
            // step length below 1e-14: breakdown only if nothing usable exists
            if (best_merit > 1e-4)
                throw NumericalBreakdown("step length below 1e-14");
            break;
        }

        x += alpha * dxc;
        if (p) y += alpha * dyc;
        z += alpha * dzc;
        s += alpha * dsc;
        tau += alpha * dtau_c;
        kappa += alpha * dkappa_c;
        mu = (s.dot(z) + tau * kappa) / (P.degree() + 1);
    }

    // restore the best iterate; classify as optimal when it already meets a
    // modestly relaxed tolerance, otherwise report maxiter with its residuals
    out.x = bx; out.y = by_; out.z = bz; out.s = bs;
    out.tau = btau; out.kappa = bkappa;
    out.pres = bpres; out.dres = bdres; out.gap = bgap;
    const double relaxed = std::max(tol_ * 100.0, 1e-8);
    if (bpres <= relaxed && bdres <= relaxed && bgap <= relaxed)
        out.status = SolveStatus::Optimal;
    else
        out.status = SolveStatus::MaxIter;
    return out;
}

// ---------------------------------------------------------------------------
// Presolve: pin cone variables defined by a single equality row, leaving a
// small core problem over the remaining variables.
// ---------------------------------------------------------------------------

struct SlotInfo {
    int public_var = -1;
    bool pinned = false;
    int row = -1;        // pinning equality row
    double coeff = 0.0;  // coefficient of the pinned variable in that row
    int core_var = -1;   // when not pinned
};

struct PresolvedProgram {
    CoreProblem core;
    std::vector<int> core_of_var;  // public var -> core index, -1 if pinned
    std::vector<SlotInfo> slots;
    std::vector<int> residual_rows;
    double obj_offset = 0.0;
    int extra_cols = 0;  // core columns appended beyond public variables (slack)
};

PresolvedProgram build_core(const ConicProgram& prog) {
    prog.validate();
    const int nv = prog.num_vars;
    const int nrows = static_cast<int>(prog.Aeq.rows());

    std::vector<int> slot_count(nv, 0);
    for (const ConeBlock& cb : prog.cones)
        for (int i : cb.indices) slot_count[i]++;

    std::vector<int> eq_count(nv, 0);
    std::vector<int> eq_row_of(nv, -1);
    std::vector<int> cone_vars_in_row(nrows, 0);
    for (int r = 0; r < nrows; ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.Aeq, r); it; ++it)
            if (it.value() != 0.0) {
                eq_count[it.col()]++;
                eq_row_of[it.col()] = r;
                if (slot_count[it.col()] > 0) cone_vars_in_row[r]++;
            }

    // pinnable: cone var in exactly one slot and one row, the row's only cone var
    std::vector<bool> pinned(nv, false);
    std::vector<double> pin_coeff(nv, 0.0);
    std::vector<bool> row_consumed(nrows, false);
    for (int v = 0; v < nv; ++v) {
        if (slot_count[v] != 1 || eq_count[v] != 1) continue;
        const int r = eq_row_of[v];
        if (cone_vars_in_row[r] != 1 || row_consumed[r]) continue;
        double coeff = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.Aeq, r); it; ++it)
            if (it.col() == v) coeff = it.value();
        if (coeff == 0.0) continue;
        pinned[v] = true;
        pin_coeff[v] = coeff;
        row_consumed[r] = true;
    }

    PresolvedProgram ps;
    ps.core_of_var.assign(nv, -1);
    int ncore = 0;
    for (int v = 0; v < nv; ++v)
        if (!pinned[v]) ps.core_of_var[v] = ncore++;

    for (int r = 0; r < nrows; ++r)
        if (!row_consumed[r]) ps.residual_rows.push_back(r);

    CoreProblem& core = ps.core;
    core.n = ncore;
    core.l = 0;
    core.c = Eigen::VectorXd::Zero(ncore);
    ps.obj_offset = 0.0;
    for (int v = 0; v < nv; ++v) {
        if (!pinned[v]) {
            core.c[ps.core_of_var[v]] += prog.objective[v];
        }
    }

    // pinned objective terms fold through the pin row: v = (b_r - sum a_f x_f)/a_v
    for (int v = 0; v < nv; ++v) {
        if (!pinned[v] || prog.objective[v] == 0.0) continue;
        const int r = eq_row_of[v];
        const double a = pin_coeff[v];
        ps.obj_offset += prog.objective[v] * prog.beq[r] / a;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.Aeq, r); it; ++it)
            if (it.col() != v && it.value() != 0.0)
                core.c[ps.core_of_var[it.col()]] -= prog.objective[v] * it.value() / a;
    }

    const int nres = static_cast<int>(ps.residual_rows.size());
    core.A = Eigen::MatrixXd::Zero(nres, ncore);
    core.b = Eigen::VectorXd::Zero(nres);
    for (int rr = 0; rr < nres; ++rr) {
        const int r = ps.residual_rows[rr];
        core.b[rr] = prog.beq[r];
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.Aeq, r); it; ++it)
            if (it.value() != 0.0) core.A(rr, ps.core_of_var[it.col()]) = it.value();
    }

    int total_slots = 0;
    for (const ConeBlock& cb : prog.cones) total_slots += cb.dim();
    core.G = Eigen::MatrixXd::Zero(total_slots, ncore);
    core.h = Eigen::VectorXd::Zero(total_slots);
    ps.slots.resize(total_slots);
    int slot = 0;
    for (const ConeBlock& cb : prog.cones) {
        core.soc_dims.push_back(cb.dim());
        for (int v : cb.indices) {
            SlotInfo& si = ps.slots[slot];
            si.public_var = v;
            if (pinned[v]) {
                const int r = eq_row_of[v];
                const double a = pin_coeff[v];
                si.pinned = true;
                si.row = r;
                si.coeff = a;
                core.h[slot] = prog.beq[r] / a;
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.Aeq, r);
                     it; ++it)
                    if (it.col() != v && it.value() != 0.0)
                        core.G(slot, ps.core_of_var[it.col()]) = it.value() / a;
            } else {
                si.core_var = ps.core_of_var[v];
                core.G(slot, si.core_var) = -1.0;
            }
            ++slot;
        }
    }
    return ps;
}

// Reconstructs the public primal vector from a core point (already de-homogenized).
Eigen::VectorXd recover_primal(const ConicProgram& prog, const PresolvedProgram& ps,
                               const Eigen::VectorXd& xcore) {
    Eigen::VectorXd x(prog.num_vars);
    for (int v = 0; v < prog.num_vars; ++v) {
        if (ps.core_of_var[v] >= 0) {
            x[v] = xcore[ps.core_of_var[v]];
        } else {
            x[v] = 0.0;  // filled below from the pin rows
        }
    }
    for (const SlotInfo& si : ps.slots) {
        if (!si.pinned) continue;
        double val = prog.beq[si.row];
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(prog.Aeq, si.row); it;
             ++it)
            if (it.col() != si.public_var && it.value() != 0.0)
                val -= it.value() * x[it.col()];
        x[si.public_var] = val / si.coeff;
    }
    return x;
}

double public_min_cone_eig(const ConicProgram& prog, const Eigen::VectorXd& x) {
    double me = std::numeric_limits<double>::infinity();
    for (const ConeBlock& cb : prog.cones) {
        Eigen::VectorXd u(cb.dim());
        for (int i = 0; i < cb.dim(); ++i) u[i] = x[cb.indices[i]];
        me = std::min(me, soc_min_eig(u));
    }
    return me;
}

}  // namespace

ConicSolution solve(const ConicProgram& program, double tol, int maxiter) {
    if (!(tol > 0) || maxiter < 1) throw InvalidArgument("solve needs tol > 0, maxiter >= 1");
    PresolvedProgram ps = build_core(program);
    ConicSolution sol;

    if (program.cones.empty()) {
        // pure equality problem: decided by least squares, no cone machinery
        Eigen::MatrixXd Ad(program.Aeq.rows(), program.num_vars);
        Ad = Eigen::MatrixXd(program.Aeq);
        const Eigen::VectorXd xls = Ad.size()
                                         ? Ad.colPivHouseholderQr().solve(program.beq).eval()
                                         : Eigen::VectorXd::Zero(program.num_vars);
        const double scale = std::max(1.0, program.beq.size() ? program.beq.norm() : 0.0);
        if (Ad.size() && (Ad * xls - program.beq).norm() > 1e-9 * scale) {
            sol.status = SolveStatus::Infeasible;
            return sol;
        }
        // bounded iff objective is orthogonal to the equality null space
        Eigen::VectorXd w = Ad.size()
                                ? Ad.transpose().colPivHouseholderQr().solve(program.objective).eval()
                                : Eigen::VectorXd::Zero(program.Aeq.rows());
        const Eigen::VectorXd cres =
            program.objective - (Ad.size() ? (Ad.transpose() * w).eval()
                                           : Eigen::VectorXd::Zero(program.num_vars));
        if (cres.norm() > 1e-9 * std::max(1.0, program.objective.norm())) {
            sol.status = SolveStatus::Unbounded;
            return sol;
        }
        sol.status = SolveStatus::Optimal;
        sol.primal = xls;
        sol.dual_eq = -w;
        sol.dual_cone.resize(0);
        sol.objective = program.objective.dot(xls);
        sol.primal_residual = Ad.size() ? (Ad * xls - program.beq).lpNorm<Eigen::Infinity>() : 0.0;
        sol.dual_residual = cres.lpNorm<Eigen::Infinity>();
        sol.duality_gap = 0.0;
        return sol;
    }

    CoreIpm ipm(ps.core, tol, maxiter);
    CoreSolution cs = ipm.run();
    sol.iterations = cs.iterations;
    sol.status = cs.status;

    if (cs.status == SolveStatus::Infeasible || cs.status == SolveStatus::Unbounded) {
        sol.dual_eq = Eigen::VectorXd::Zero(program.Aeq.rows());
        if (cs.status == SolveStatus::Infeasible) {
            // certificate: A'y + G'z ~ 0, b'y + h'z = -1, z in K
            for (std::size_t rr = 0; rr < ps.residual_rows.size(); ++rr)
                sol.dual_eq[ps.residual_rows[rr]] = cs.y[rr];
            sol.dual_cone = cs.z;
            for (std::size_t k = 0; k < ps.slots.size(); ++k)
                if (ps.slots[k].pinned)
                    sol.dual_eq[ps.slots[k].row] = cs.z[k] / ps.slots[k].coeff;
        }
        return sol;
    }

    const double tau = cs.tau > 0 ? cs.tau : 1.0;
    const Eigen::VectorXd xcore = cs.x / tau;
    sol.primal = recover_primal(program, ps, xcore);
    sol.objective = program.objective.dot(sol.primal);

    // duals mapped back to the public program
    sol.dual_eq = Eigen::VectorXd::Zero(program.Aeq.rows());
    for (std::size_t rr = 0; rr < ps.residual_rows.size(); ++rr)
        sol.dual_eq[ps.residual_rows[rr]] = cs.y.size() ? cs.y[rr] / tau : 0.0;
    sol.dual_cone = cs.z / tau;
    for (std::size_t k = 0; k < ps.slots.size(); ++k) {
        const SlotInfo& si = ps.slots[k];
        if (si.pinned)
            sol.dual_eq[si.row] =
                (sol.dual_cone[k] - program.objective[si.public_var]) / si.coeff;
    }

    // public-level residuals, not trusted from the core
    if (program.Aeq.rows() > 0)
        sol.primal_residual =
            (program.Aeq * sol.primal - program.beq).lpNorm<Eigen::Infinity>();
    const double cone_viol = std::max(0.0, -public_min_cone_eig(program, sol.primal));
    sol.primal_residual = std::max(sol.primal_residual, cone_viol);

    Eigen::VectorXd dual_stat = program.objective;
    if (program.Aeq.rows() > 0) dual_stat += program.Aeq.transpose() * sol.dual_eq;
    int slot = 0;
    for (const ConeBlock& cb : program.cones)
        for (int idx : cb.indices) {
            dual_stat[idx] -= sol.dual_cone[slot];
            ++slot;
        }
    sol.dual_residual = dual_stat.lpNorm<Eigen::Infinity>();
    sol.duality_gap = std::abs(sol.objective + (program.beq.size()
                                                    ? program.beq.dot(sol.dual_eq)
                                                    : 0.0));
    return sol;
}

FeasibilityResult check_feasible(const ConicProgram& program, double tol) {
    // A program that already carries an objective is treated as a phase-I
    // (max-slack) program: its maximized objective IS the feasibility margin.
    // Zero-objective programs get an internal slack shifted into every cone.
    if (program.objective.lpNorm<Eigen::Infinity>() != 0.0) {
        const ConicSolution sol = solve(program, 1e-9, 200);
        FeasibilityResult fr;
        if (sol.status == SolveStatus::Infeasible) {
            fr.feasible = false;
            fr.certificate = sol.dual_eq;
            return fr;
        }
        if (sol.status != SolveStatus::Optimal &&
            !(sol.status == SolveStatus::MaxIter && sol.primal_residual < 1e-6 &&
              sol.dual_residual < 1e-6))
            throw NumericalBreakdown("feasibility phase did not converge: " +
                                     std::string(status_name(sol.status)));
        fr.slack = -sol.objective;
        fr.feasible = fr.slack >= tol;
        fr.witness = sol.primal;
        if (!fr.feasible) fr.certificate = sol.dual_eq;
        return fr;
    }

    PresolvedProgram ps = build_core(program);
    CoreProblem aug = ps.core;
    const int n = aug.n;
    const double cap = 1e3;

    // append the slack column: every cone head slot gains +1 (head - slack),
    // plus one orthant row enforcing slack <= cap
    aug.n = n + 1;
    Eigen::MatrixXd G(aug.m() + 1, n + 1);
    G.setZero();
    G.topLeftCorner(aug.m(), n) = aug.G;
    int slot = 0;
    for (int q : aug.soc_dims) {
        G(slot, n) = 1.0;
        slot += q;
    }
    G(aug.m(), n) = 1.0;  // cap - slack >= 0
    Eigen::VectorXd h(aug.m() + 1);
    h.head(aug.m()) = aug.h;
    h[aug.m()] = cap;
    // orthant rows come first in the core layout
    Eigen::MatrixXd G2(G.rows(), G.cols());
    G2.row(0) = G.row(G.rows() - 1);
    G2.bottomRows(G.rows() - 1) = G.topRows(G.rows() - 1);
    Eigen::VectorXd h2(h.size());
    h2[0] = h[h.size() - 1];
    h2.tail(h.size() - 1) = h.head(h.size() - 1);
    aug.G = G2;
    aug.h = h2;
    aug.l = 1;
    Eigen::MatrixXd A(aug.A.rows(), n + 1);
    if (aug.A.rows() > 0) {
        A.leftCols(n) = aug.A;
        A.col(n).setZero();
        aug.A = A;
    } else {
        aug.A = Eigen::MatrixXd::Zero(0, n + 1);
    }
    aug.c = Eigen::VectorXd::Zero(n + 1);
    aug.c[n] = -1.0;  // maximize the slack

    CoreIpm ipm(aug, 1e-9, 200);
    CoreSolution cs = ipm.run();

    FeasibilityResult fr;
    if (cs.status == SolveStatus::Infeasible) {
        fr.feasible = false;
        fr.certificate = cs.y;
        return fr;
    }
    if (cs.status != SolveStatus::Optimal)
        throw NumericalBreakdown("feasibility phase did not converge: " +
                                 std::string(status_name(cs.status)));
    const double slack = cs.x[n] / cs.tau;
    fr.slack = slack;
    fr.feasible = slack >= tol;
    const Eigen::VectorXd xcore = (cs.x / cs.tau).head(n);
    fr.witness = recover_primal(program, ps, xcore);
    if (!fr.feasible) {
        fr.certificate = Eigen::VectorXd::Zero(program.Aeq.rows());
        for (std::size_t rr = 0; rr < ps.residual_rows.size(); ++rr)
            fr.certificate[ps.residual_rows[rr]] = cs.y.size() ? cs.y[rr] / cs.tau : 0.0;
    }
    return fr;
}

}  // namespace lpvsyn
