#include "lpvsyn/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace lpvsyn {

using nlohmann::json;

double PiecewiseConstant::eval(double t) const {
    if (times.empty()) return values.empty() ? 0.0 : values.front();
    double v = values.front();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (t >= times[i] - 1e-12) v = values[i];
    }
    return v;
}

PiecewiseConstant PiecewiseConstant::constant(double v) { return {{0.0}, {v}}; }

PiecewiseConstant PiecewiseConstant::steps(const std::vector<double>& values,
                                           double segment_duration) {
    PiecewiseConstant pc;
    for (std::size_t i = 0; i < values.size(); ++i) {
        pc.times.push_back(i * segment_duration);
        pc.values.push_back(values[i]);
    }
    return pc;
}

void SimScenario::validate() const {
    if (!(duration > 0)) throw InvalidArgument("duration must be positive");
    if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
    if (!(Ts > 0)) throw InvalidArgument("Ts must be positive");
    if (reference.times.size() != reference.values.size() ||
        disturbance.times.size() != disturbance.values.size())
        throw InvalidArgument("breakpoint/value length mismatch");
}

SimScenario SimScenario::staircase_default() {
    SimScenario s;
    s.reference = PiecewiseConstant::steps({0.0, M_PI / 4, M_PI / 2, M_PI / 4, 0.0}, 4.0);
    s.duration = 20.0;
    return s;
}

void SimScenario::save_json(const std::string& path) const {
    json j;
    j["duration"] = duration;
    j["Ts"] = Ts;
    j["substeps"] = substeps;
    j["reference"]["times"] = reference.times;
    j["reference"]["values"] = reference.values;
    j["disturbance"]["times"] = disturbance.times;
    j["disturbance"]["values"] = disturbance.values;
    j["initial_state"] = {initial_state[0], initial_state[1], initial_state[2]};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(1, '\t') << '\n';
}

SimScenario SimScenario::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("JSON parse error in " + path + ": " + e.what());
    }
    SimScenario s;
    s.duration = j.value("duration", 20.0);
    s.Ts = j.value("Ts", 0.005);
    s.substeps = j.value("substeps", 25);
    if (j.contains("reference")) {
        s.reference.times = j["reference"].at("times").get<std::vector<double>>();
        s.reference.values = j["reference"].at("values").get<std::vector<double>>();
    }
    if (j.contains("disturbance")) {
        s.disturbance.times = j["disturbance"].at("times").get<std::vector<double>>();
        s.disturbance.values = j["disturbance"].at("values").get<std::vector<double>>();
    }
    if (j.contains("initial_state")) {
        const auto v = j["initial_state"].get<std::vector<double>>();
        if (v.size() != 3) throw InvalidArgument("initial_state needs 3 entries");
        s.initial_state = Eigen::Vector3d(v[0], v[1], v[2]);
    }
    s.validate();
    return s;
}

void SimResult::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "t,r,y,e,u,p";
    for (Eigen::Index i = 0; i < states.rows(); ++i) out << ",x" << i;
    out << "\n";
    char buf[64];
    for (std::size_t k = 0; k < time.size(); ++k) {
        auto put = [&](double v, char sep) {
            std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
            out << buf;
        };
        put(time[k], ',');
        put(r[k], ',');
        put(y[k], ',');
        put(e[k], ',');
        put(u[k], ',');
        put(p[k], states.rows() ? ',' : '\n');
        for (Eigen::Index i = 0; i < states.rows(); ++i)
            put(states(i, static_cast<Eigen::Index>(k)), i + 1 == states.rows() ? '\n' : ',');
    }
}

SimResult simulate_frozen_step(const StateSpaceModel& plant, ScheduledFilter filter, double p,
                               double duration, double step_amplitude) {
    plant.validate();
    if (plant.domain != Domain::Discrete) throw InvalidArgument("frozen loop needs a discrete plant");
    if (std::abs(plant.Ts - filter.Ts()) > 1e-15)
        throw InvalidArgument("plant and controller sampling times differ");
    const int n = plant.order();
    const int steps = static_cast<int>(std::round(duration / plant.Ts));
    SimResult res;
    res.states.resize(n, steps);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    filter.reset();
    for (int k = 0; k < steps; ++k) {
        const double rk = step_amplitude;
        // resolve the scalar algebraic loop when the plant has feedthrough
        const double s_k = filter.state_output(p);
        const double w0 = filter.feedthrough(p);
        const double denom = 1.0 + plant.D * w0;
        if (std::abs(denom) < 1e-12) throw Divergence("singular algebraic loop");
        const double Cx = (plant.C * x)(0);
        const double ek = (rk - Cx - plant.D * s_k) / denom;
        const double uk = filter.step(ek, p);
        const double yk = Cx + plant.D * uk;
        res.time.push_back(k * plant.Ts);
        res.r.push_back(rk);
        res.y.push_back(yk);
        res.e.push_back(ek);
        res.u.push_back(uk);
        res.p.push_back(p);
        res.states.col(k) = x;
        x = plant.A * x + plant.B * uk;
        if (!x.allFinite() || std::abs(yk) > 1e6)
            throw Divergence("frozen loop diverged at t = " + std::to_string(k * plant.Ts));
    }
    return res;
}

namespace {

Eigen::Vector3d disk_rhs(const DiskParameters& prm, const Eigen::Vector3d& x, double u) {
    const double theta = x[0], rate = x[1], current = x[2];
    Eigen::Vector3d dx;
    dx[0] = rate;
    dx[1] = prm.M * prm.g * prm.l / prm.J * std::sin(theta) - prm.b / prm.J * rate +
            prm.K / prm.J * current;
    dx[2] = -prm.K / prm.L * rate - prm.R / prm.L * current + u / prm.L;
    return dx;
}

Eigen::Vector3d rk4_step(const DiskParameters& prm, const Eigen::Vector3d& x, double u, double h) {
    const Eigen::Vector3d k1 = disk_rhs(prm, x, u);
    const Eigen::Vector3d k2 = disk_rhs(prm, x + 0.5 * h * k1, u);
    const Eigen::Vector3d k3 = disk_rhs(prm, x + 0.5 * h * k2, u);
    const Eigen::Vector3d k4 = disk_rhs(prm, x + h * k3, u);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

SimResult simulate_nonlinear(const DiskParameters& params, ScheduledFilter filter,
                             const SimScenario& scenario, std::optional<double> scheduling_override) {
    params.validate();
    scenario.validate();
    const double Ts = scenario.Ts;
    const int steps = static_cast<int>(std::round(scenario.duration / Ts));
    const double h = Ts / scenario.substeps;
    SimResult res;
    res.states.resize(3, steps);
    Eigen::Vector3d x = scenario.initial_state;
    filter.reset();
    for (int k = 0; k < steps; ++k) {
        const double t = k * Ts;
        const double rk = scenario.reference.eval(t);
        const double theta = x[0];
        const double pk = scheduling_override ? *scheduling_override : sinc(theta);
        const double ek = rk - theta;
        const double uk = filter.step(ek, pk) + scenario.disturbance.eval(t);
        res.time.push_back(t);
        res.r.push_back(rk);
        res.y.push_back(theta);
        res.e.push_back(ek);
        res.u.push_back(uk);
        res.p.push_back(pk);
        res.states.col(k) = x;
        for (int i = 0; i < scenario.substeps; ++i) x = rk4_step(params, x, uk, h);
        if (!x.allFinite() || std::abs(x[0]) > 1e6)
            throw Divergence("nonlinear loop diverged at t = " + std::to_string(t));
    }
    return res;
}

SimResult simulate_open_loop(const DiskParameters& params, const SimScenario& scenario) {
    params.validate();
    scenario.validate();
    const double Ts = scenario.Ts;
    const int steps = static_cast<int>(std::round(scenario.duration / Ts));
    const double h = Ts / scenario.substeps;
    SimResult res;
    res.states.resize(3, steps);
    Eigen::Vector3d x = scenario.initial_state;
    for (int k = 0; k < steps; ++k) {
        const double t = k * Ts;
        const double uk = scenario.disturbance.eval(t);
        res.time.push_back(t);
        res.r.push_back(0.0);
        res.y.push_back(x[0]);
        res.e.push_back(-x[0]);
        res.u.push_back(uk);
        res.p.push_back(sinc(x[0]));
        res.states.col(k) = x;
        for (int i = 0; i < scenario.substeps; ++i) x = rk4_step(params, x, uk, h);
        if (!x.allFinite() || std::abs(x[0]) > 1e6)
            throw Divergence("open-loop integration diverged at t = " + std::to_string(t));
    }
    return res;
}

double disk_mechanical_energy(const DiskParameters& prm, double angle, double rate) {
    // potential U = M g l cos(angle), zero reference at the hanging position
    return 0.5 * prm.J * rate * rate + prm.M * prm.g * prm.l * (std::cos(angle) + 1.0);
}

}  // namespace lpvsyn
