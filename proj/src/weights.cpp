#include "lpvsyn/weights.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace lpvsyn {

using nlohmann::json;

Weight Weight::constant(double value) {
    Weight w;
    w.kind = Kind::Rational;
    w.num = {value};
    w.den = {1.0};
    return w;
}

Weight Weight::rational(std::vector<double> num, std::vector<double> den) {
    Weight w;
    w.kind = Kind::Rational;
    w.num = std::move(num);
    w.den = std::move(den);
    w.validate();
    return w;
}

Weight Weight::sampled(std::vector<Complex> samples) {
    Weight w;
    w.kind = Kind::Samples;
    w.samples = std::move(samples);
    w.validate();
    return w;
}

namespace {

// roots of c[0] + c[1] x + ... + c[n] x^n via the companion matrix
std::vector<Complex> poly_roots(const std::vector<double>& coeffs) {
    std::vector<double> c = coeffs;
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

void Weight::validate() const {
    if (kind == Kind::Rational) {
        if (num.empty() || den.empty() || den[0] == 0.0)
            throw InvalidArgument("rational weight needs nonempty num/den with den[0] != 0");
        for (double c : num)
            if (!std::isfinite(c)) throw NanSample("weight numerator coefficient");
        for (double c : den)
            if (!std::isfinite(c)) throw NanSample("weight denominator coefficient");
        // W(z) = num(z^-1)/den(z^-1): poles are the reciprocals of den roots in x = z^-1,
        // so stability means all den(x) roots strictly OUTSIDE the unit x-circle...
        // equivalently the z-polynomial z^m den(z^-1) has roots strictly inside.
        std::vector<double> zpoly(den.rbegin(), den.rend());
        for (const Complex& r : poly_roots(zpoly))
            if (std::abs(r) >= 1.0 - 1e-12)
                throw InvalidArgument("weight has a pole on or outside the unit circle");
    } else {
        if (samples.empty()) throw InvalidArgument("sampled weight has no samples");
        for (const Complex& s : samples)
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                throw NanSample("weight sample");
    }
}

Complex Weight::eval(Complex z) const {
    if (kind != Kind::Rational) throw InvalidArgument("eval() is for rational weights");
    const Complex zi = 1.0 / z;
    Complex n = 0.0, d = 0.0;
    for (auto it = num.rbegin(); it != num.rend(); ++it) n = n * zi + *it;
    for (auto it = den.rbegin(); it != den.rend(); ++it) d = d * zi + *it;
    return n / d;
}

void WeightSet::validate() const {
    for (const auto& w : weights) w.validate();
}

namespace {

// Tustin map of a first-order continuous prototype (b1 s + b0)/(a1 s + a0).
Weight tustin_first_order(double b1, double b0, double a1, double a0, double Ts) {
    const double k = 2.0 / Ts;
    const double B0 = b1 * k + b0, B1 = -b1 * k + b0;
    const double A0 = a1 * k + a0, A1 = -a1 * k + a0;
    return Weight::rational({B0 / A0, B1 / A0}, {1.0, A1 / A0});
}

}  // namespace

WeightSet WeightSet::defaults(double Ts) {
    WeightSet ws;
    // sensitivity: low-frequency gain 1e4, crossover ~10 rad/s, high-frequency 1/2
    ws.at(Channel::S) = tustin_first_order(0.5, 10.0, 1.0, 1e-3, Ts);
    // complementary sensitivity: high-frequency gain 10, crossover ~100 rad/s
    ws.at(Channel::T) = tustin_first_order(1.0, 50.0, 0.1, 100.0, Ts);
    ws.at(Channel::KS) = Weight::constant(1e-3);
    ws.at(Channel::SG) = Weight::constant(1e-2);
    return ws;
}

std::vector<Complex> weight_frf(const WeightSet& weights, Channel channel,
                                const FrequencyGrid& grid) {
    const Weight& w = weights.at(channel);
    std::vector<Complex> out(grid.size());
    if (w.kind == Weight::Kind::Samples) {
        if (w.samples.size() != grid.size())
            throw InvalidArgument("sampled weight length does not match the grid");
        out = w.samples;
        return out;
    }
    if (grid.domain == Domain::Continuous)
        throw InvalidArgument("rational weights are discrete-time; use samples on continuous grids");
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = w.eval(grid.lambda(k));
    return out;
}

namespace {

json weight_to_json(const Weight& w) {
    json j;
    if (w.kind == Weight::Kind::Rational) {
        j["kind"] = "rational";
        j["num"] = w.num;
        j["den"] = w.den;
    } else {
        j["kind"] = "samples";
        json vals = json::array();
        for (const Complex& c : w.samples) vals.push_back(json::array({c.real(), c.imag()}));
        j["values"] = std::move(vals);
    }
    return j;
}

Weight weight_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rational")
        return Weight::rational(j.at("num").get<std::vector<double>>(),
                                j.at("den").get<std::vector<double>>());
    if (kind == "constant") return Weight::constant(j.at("value").get<double>());
    if (kind == "samples") {
        std::vector<Complex> vals;
        for (const auto& e : j.at("values")) vals.emplace_back(e[0].get<double>(), e[1].get<double>());
        return Weight::sampled(std::move(vals));
    }
    throw InvalidArgument("unknown weight kind '" + kind + "'");
}

}  // namespace

void WeightSet::save_json(const std::string& path) const {
    json j;
    for (Channel c : {Channel::S, Channel::SG, Channel::KS, Channel::T})
        j[channel_name(c)] = weight_to_json(at(c));
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(1, '\t') << '\n';
}

WeightSet WeightSet::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("JSON parse error in " + path + ": " + e.what());
    }
    WeightSet ws;
    for (Channel c : {Channel::S, Channel::SG, Channel::KS, Channel::T}) {
        if (!j.contains(channel_name(c)))
            throw UnknownChannel(std::string("missing weight for channel ") + channel_name(c));
        ws.at(c) = weight_from_json(j.at(channel_name(c)));
    }
    ws.validate();
    return ws;
}

}  // namespace lpvsyn
