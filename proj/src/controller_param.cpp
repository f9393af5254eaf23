#include "lpvsyn/controller_param.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace lpvsyn {

using nlohmann::json;

namespace {

std::vector<Complex> poly_roots_z(const std::vector<double>& den_zinv) {
    // roots (in z) of den[0] + den[1] z^-1 + ... after clearing z^-m
    std::vector<double> c(den_zinv.rbegin(), den_zinv.rend());
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    const int n = static_cast<int>(c.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) comp(0, i) = -c[n - 1 - i] / c[n];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    std::vector<Complex> roots(n);
    for (int i = 0; i < n; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

}  // namespace

void ObfBasis::validate() const {
    if (order < 0) throw InvalidArgument("basis order must be >= 0");
    if (!(Ts > 0)) throw InvalidArgument("basis Ts must be positive");
    if (kind == Kind::UserRational) {
        if (static_cast<int>(user.size()) != order)
            throw UnsupportedBasis("need one rational basis per non-constant index");
        for (const auto& r : user) {
            if (r.num.empty() || r.den.empty() || r.den[0] == 0.0)
                throw UnsupportedBasis("user basis needs nonempty num/den with den[0] != 0");
            for (const Complex& root : poly_roots_z(r.den))
                if (std::abs(root) >= 1.0 - 1e-12)
                    throw UnsupportedBasis("user basis pole on or outside the unit circle");
        }
    }
}

Complex ObfBasis::eval(int i, double omega) const {
    if (i < 0 || i > order) throw InvalidArgument("basis index out of range");
    const Complex z = std::exp(Complex(0.0, omega * Ts));
    if (i == 0) return 1.0;  // phi_0 = 1
    if (kind == Kind::Pulse) return std::pow(1.0 / z, i);
    const Rational& r = user[i - 1];
    const Complex zi = 1.0 / z;
    Complex n = 0.0, d = 0.0;
    for (auto it = r.num.rbegin(); it != r.num.rend(); ++it) n = n * zi + *it;
    for (auto it = r.den.rbegin(); it != r.den.rend(); ++it) d = d * zi + *it;
    return n / d;
}

SchedulingBasis SchedulingBasis::affine() {
    SchedulingBasis s;
    s.kind = Kind::Affine;
    s.m = 2;
    return s;
}

SchedulingBasis SchedulingBasis::polynomial(int degree) {
    if (degree < 0) throw InvalidArgument("polynomial degree must be >= 0");
    SchedulingBasis s;
    s.kind = Kind::Polynomial;
    s.m = degree + 1;
    return s;
}

void SchedulingBasis::validate() const {
    if (m < 1) throw InvalidArgument("scheduling basis needs m >= 1");
    if (kind == Kind::Affine && m != 2) throw InvalidArgument("affine basis has m = 2");
    if (kind == Kind::Table) {
        if (table_values.rows() != m ||
            table_values.cols() != static_cast<Eigen::Index>(table_points.size()))
            throw InvalidArgument("scheduling table shape mismatch");
        if ((table_values.row(0).array() != 1.0).any())
            throw InvalidArgument("psi_1 must be identically 1");
    }
}

Eigen::VectorXd SchedulingBasis::eval(double p) const {
    Eigen::VectorXd out(m);
    switch (kind) {
        case Kind::Affine:
            out << 1.0, p;
            return out;
        case Kind::Polynomial:
            for (int l = 0; l < m; ++l) out[l] = std::pow(p, l);
            return out;
        case Kind::Table: {
            for (std::size_t j = 0; j < table_points.size(); ++j)
                if (std::abs(table_points[j] - p) <= 1e-12) return table_values.col(j);
            throw OutOfRange("scheduling value not tabulated: " + std::to_string(p));
        }
    }
    throw InvalidArgument("unreachable scheduling kind");
}

ControllerParameterization ControllerParameterization::pulse(int nN, int nD, double Ts,
                                                             SchedulingBasis sched) {
    if (nD < nN) throw InvalidArgument("denominator order must be >= numerator order");
    ControllerParameterization c;
    c.numBasis = {ObfBasis::Kind::Pulse, nN, Ts, {}};
    c.denBasis = {ObfBasis::Kind::Pulse, nD, Ts, {}};
    c.sched = std::move(sched);
    c.w = Eigen::MatrixXd::Zero(nN + 1, c.sched.m);
    c.v = Eigen::MatrixXd::Zero(nD + 1, c.sched.m);
    c.v(0, 0) = 1.0;  // monic pinning
    c.validate();
    return c;
}

void ControllerParameterization::validate() const {
    numBasis.validate();
    denBasis.validate();
    sched.validate();
    if (denBasis.order < numBasis.order)
        throw InvalidArgument("denominator order must be >= numerator order");
    if (std::abs(numBasis.Ts - denBasis.Ts) > 1e-15)
        throw InvalidArgument("factor bases must share Ts");
    if (w.rows() != numBasis.order + 1 || w.cols() != sched.m)
        throw InvalidArgument("w must be (nN+1) x m");
    if (v.rows() != denBasis.order + 1 || v.cols() != sched.m)
        throw InvalidArgument("v must be (nD+1) x m");
    if (v(0, 0) != 1.0) throw InvalidArgument("v[0][1] must be pinned to 1 (monic D)");
    for (Eigen::Index l = 1; l < v.cols(); ++l)
        if (v(0, l) != 0.0) throw InvalidArgument("v[0][l] must be pinned to 0 for l >= 2");
    if (!w.allFinite() || !v.allFinite()) throw NanSample("non-finite controller coefficient");
}

int ControllerParameterization::theta_dim() const {
    return static_cast<int>(w.size() + v.size() - sched.m);  // v row 0 pinned
}

Eigen::VectorXd ControllerParameterization::to_theta() const {
    Eigen::VectorXd th(theta_dim());
    int k = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index l = 0; l < w.cols(); ++l) th[k++] = w(i, l);
    for (Eigen::Index i = 1; i < v.rows(); ++i)
        for (Eigen::Index l = 0; l < v.cols(); ++l) th[k++] = v(i, l);
    return th;
}

void ControllerParameterization::from_theta(const Eigen::VectorXd& theta) {
    if (theta.size() != theta_dim()) throw InvalidArgument("theta dimension mismatch");
    int k = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index l = 0; l < w.cols(); ++l) w(i, l) = theta[k++];
    for (Eigen::Index i = 1; i < v.rows(); ++i)
        for (Eigen::Index l = 0; l < v.cols(); ++l) v(i, l) = theta[k++];
}

Complex ControllerParameterization::eval_factor(Factor which, double omega, double p) const {
    const ObfBasis& basis = which == Factor::N ? numBasis : denBasis;
    const Eigen::MatrixXd& coef = which == Factor::N ? w : v;
    const Eigen::VectorXd psi = sched.eval(p);
    Complex acc = 0.0;
    for (int i = 0; i <= basis.order; ++i) {
        const double ci = coef.row(i).dot(psi);
        acc += ci * basis.eval(i, omega);
    }
    return acc;
}

RegressorRow ControllerParameterization::regressor_row(Factor which, double omega, double p) const {
    const ObfBasis& basis = which == Factor::N ? numBasis : denBasis;
    const Eigen::VectorXd psi = sched.eval(p);
    RegressorRow rr;
    rr.row = Eigen::RowVectorXcd::Zero(theta_dim());
    rr.offset = 0.0;
    const int m = sched.m;
    const int w_count = static_cast<int>(w.size());
    if (which == Factor::N) {
        for (int i = 0; i <= basis.order; ++i) {
            const Complex phi = basis.eval(i, omega);
            for (int l = 0; l < m; ++l) rr.row[i * m + l] = psi[l] * phi;
        }
    } else {
        rr.offset = basis.eval(0, omega);  // pinned v0 . psi = psi_1 = 1
        for (int i = 1; i <= basis.order; ++i) {
            const Complex phi = basis.eval(i, omega);
            for (int l = 0; l < m; ++l) rr.row[w_count + (i - 1) * m + l] = psi[l] * phi;
        }
    }
    return rr;
}

Eigen::VectorXd ControllerParameterization::num_coefficients(double p) const {
    return w * sched.eval(p);
}

Eigen::VectorXd ControllerParameterization::den_coefficients(double p) const {
    return v * sched.eval(p);
}

void ControllerParameterization::save_json(const std::string& path) const {
    validate();
    json j;
    j["basis"]["kind"] = numBasis.kind == ObfBasis::Kind::Pulse ? "pulse" : "rational";
    j["basis"]["order"] = denBasis.order;
    j["basis"]["Ts"] = numBasis.Ts;
    std::string skind = "affine";
    if (sched.kind == SchedulingBasis::Kind::Polynomial) skind = "polynomial";
    if (sched.kind == SchedulingBasis::Kind::Table) skind = "table";
    j["sched"]["kind"] = skind;
    j["sched"]["m"] = sched.m;
    auto mat = [](const Eigen::MatrixXd& M) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            json r = json::array();
            for (Eigen::Index l = 0; l < M.cols(); ++l) r.push_back(M(i, l));
            rows.push_back(std::move(r));
        }
        return rows;
    };
    j["w"] = mat(w);
    j["v"] = mat(v);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(1, '\t') << '\n';
}

ControllerParameterization ControllerParameterization::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("JSON parse error in " + path + ": " + e.what());
    }
    const std::string bkind = j.at("basis").at("kind").get<std::string>();
    if (bkind != "pulse") throw UnsupportedBasis("controller files carry pulse bases, got " + bkind);
    const double Ts = j.at("basis").at("Ts").get<double>();
    const std::string skind = j.at("sched").at("kind").get<std::string>();
    const int m = j.at("sched").at("m").get<int>();
    SchedulingBasis sched;
    if (skind == "affine")
        sched = SchedulingBasis::affine();
    else if (skind == "polynomial")
        sched = SchedulingBasis::polynomial(m - 1);
    else
        throw UnsupportedBasis("scheduling kind '" + skind + "' not loadable from file");
    auto mat = [](const json& rows) {
        const auto r = rows.size();
        const auto c = rows.at(0).size();
        Eigen::MatrixXd M(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) throw InvalidArgument("ragged coefficient matrix");
            for (std::size_t l = 0; l < c; ++l) M(i, l) = rows[i][l].get<double>();
        }
        return M;
    };
    const Eigen::MatrixXd w = mat(j.at("w"));
    const Eigen::MatrixXd v = mat(j.at("v"));
    ControllerParameterization cp =
        ControllerParameterization::pulse(static_cast<int>(w.rows()) - 1,
                                          static_cast<int>(v.rows()) - 1, Ts, sched);
    cp.w = w;
    cp.v = v;
    cp.validate();
    return cp;
}

}  // namespace lpvsyn
