#include "lpvsyn/analysis.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lpvsyn/synthesis.hpp"

namespace lpvsyn {

using nlohmann::json;

const char* verdict_name(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::Stable: return "stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Marginal: return "marginal";
    }
    return "?";
}

bool StabilityCertificate::all_stable() const {
    for (const auto& e : entries)
        if (e.verdict != StabilityVerdict::Stable) return false;
    return !entries.empty();
}

int winding_number(const std::vector<Complex>& curve, double origin_tol) {
    if (curve.size() < 2) throw InvalidArgument("winding needs at least 2 samples");
    double maxabs = 0.0;
    for (const Complex& c : curve) maxabs = std::max(maxabs, std::abs(c));
    const double tol = origin_tol > 0 ? origin_tol : 1e-9 * maxabs;
    for (const Complex& c : curve)
        if (std::abs(c) <= tol) throw NearOrigin("curve sample within tolerance of the origin");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double inc = std::arg(curve[i + 1] / curve[i]);
        if (std::abs(inc) > M_PI / 2)
            throw GridTooCoarse("phase increment " + std::to_string(inc) + " exceeds pi/2");
        total += inc;
    }
    // close the loop
    const double inc = std::arg(curve.front() / curve.back());
    if (std::abs(inc) > M_PI / 2) throw GridTooCoarse("closing phase increment exceeds pi/2");
    total += inc;
    return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

std::vector<Complex> characteristic_samples(const FrfDataset& data,
                                            const ControllerParameterization& controller,
                                            int point_index) {
    if (point_index < 0 || point_index >= static_cast<int>(data.points.size()))
        throw OutOfRange("point index");
    const double p = data.points.points[point_index];
    std::vector<Complex> Dp(data.grid.size());
    for (std::size_t k = 0; k < data.grid.size(); ++k) {
        const double omega = data.grid.omegas[k];
        const Complex Nk = controller.eval_factor(Factor::N, omega, p);
        const Complex Dk = controller.eval_factor(Factor::D, omega, p);
        Dp[k] = data.samplesD(k, point_index) * Dk + data.samplesN(k, point_index) * Nk;
    }
    return Dp;
}

std::vector<Complex> close_curve_conjugate(const std::vector<Complex>& samples) {
    // unit circle traversed once: positive frequencies up, conjugates down.
    // The Nyquist sample (last) is its own mirror for real-coefficient data.
    std::vector<Complex> curve = samples;
    for (std::size_t k = samples.size() - 1; k-- > 0;) curve.push_back(std::conj(samples[k]));
    return curve;
}

StabilityCertificateEntry check_stability_at(const FrfDataset& data,
                                             const ControllerParameterization& controller,
                                             int point_index) {
    StabilityCertificateEntry entry;
    entry.p = data.points.points[point_index];
    const std::vector<Complex> Dp = characteristic_samples(data, controller, point_index);
    entry.min_abs_Dp = std::numeric_limits<double>::infinity();
    for (const Complex& c : Dp) entry.min_abs_Dp = std::min(entry.min_abs_Dp, std::abs(c));
    const std::vector<Complex> curve = close_curve_conjugate(Dp);
    try {
        entry.winding = winding_number(curve);
    } catch (const NearOrigin&) {
        entry.verdict = StabilityVerdict::Marginal;
        return entry;
    }
    double maxabs = 0.0;
    for (const Complex& c : Dp) maxabs = std::max(maxabs, std::abs(c));
    if (entry.winding == 0 && entry.min_abs_Dp > 1e-9 * maxabs) {
        entry.verdict = StabilityVerdict::Stable;
        // multiplier phase witness: Re(Dp e^{i phi}) = |Dp| > 0
        entry.multiplier_phase.resize(Dp.size());
        double prev = -std::arg(Dp[0]);
        entry.multiplier_phase[0] = prev;
        for (std::size_t k = 1; k < Dp.size(); ++k) {
            double ph = -std::arg(Dp[k]);
            while (ph - prev > M_PI) ph -= 2.0 * M_PI;
            while (ph - prev < -M_PI) ph += 2.0 * M_PI;
            entry.multiplier_phase[k] = ph;
            prev = ph;
        }
    } else {
        entry.verdict = StabilityVerdict::Unstable;
    }
    return entry;
}

StabilityCertificate check_stability(const FrfDataset& data,
                                     const ControllerParameterization& controller) {
    data.validate();
    controller.validate();
    StabilityCertificate cert;
    for (int t = 0; t < static_cast<int>(data.points.size()); ++t)
        cert.entries.push_back(check_stability_at(data, controller, t));
    return cert;
}

PerformanceCertificate check_performance(const FrfDataset& data, const WeightSet& weights,
                                         const ControllerParameterization& controller,
                                         double gamma, double tol) {
    if (!(gamma > 0)) throw InvalidArgument("gamma must be positive");
    PerformanceCertificate cert;
    cert.gamma = gamma;
    cert.stability = check_stability(data, controller);

    const std::vector<Channel> chans{Channel::S, Channel::SG, Channel::KS, Channel::T};
    std::vector<std::vector<Complex>> wfrf(chans.size());
    for (std::size_t c = 0; c < chans.size(); ++c)
        wfrf[c] = weight_frf(weights, chans[c], data.grid);

    cert.worst_margin = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd theta = controller.to_theta();
    for (int t = 0; t < static_cast<int>(data.points.size()); ++t) {
        const double p = data.points.points[t];
        for (std::size_t k = 0; k < data.grid.size(); ++k) {
            const double omega = data.grid.omegas[k];
            const RegressorRow rowN = controller.regressor_row(Factor::N, omega, p);
            const RegressorRow rowD = controller.regressor_row(Factor::D, omega, p);
            const Complex Ng = data.samplesN(k, t), Dg = data.samplesD(k, t);
            for (std::size_t c = 0; c < chans.size(); ++c) {
                const ChannelFactors cf = channel_factors(Ng, Dg, rowN, rowD, chans[c]);
                const Complex Dp = (cf.Dp.row * theta)(0) + cf.Dp.offset;
                const Complex Np = (cf.Np.row * theta)(0) + cf.Np.offset;
                const double margin = std::abs(Dp) - std::abs(wfrf[c][k] * Np) / gamma;
                cert.margins.push_back({omega, p, chans[c], margin});
                cert.worst_margin = std::min(cert.worst_margin, margin);
            }
        }
    }
    cert.pass = cert.stability.all_stable() && cert.worst_margin > tol;
    return cert;
}

namespace {

json entry_to_json(const StabilityCertificateEntry& e) {
    json j;
    j["p"] = e.p;
    j["winding"] = e.winding;
    j["min_abs_Dp"] = e.min_abs_Dp;
    j["verdict"] = verdict_name(e.verdict);
    if (!e.multiplier_phase.empty()) j["multiplier_phase"] = e.multiplier_phase;
    return j;
}

}  // namespace

void save_stability_json(const StabilityCertificate& cert, const std::string& path) {
    json j;
    j["all_stable"] = cert.all_stable();
    json entries = json::array();
    for (const auto& e : cert.entries) entries.push_back(entry_to_json(e));
    j["points"] = std::move(entries);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(1, '\t') << '\n';
}

void save_performance_json(const PerformanceCertificate& cert, const std::string& path) {
    json j;
    j["gamma"] = cert.gamma;
    j["pass"] = cert.pass;
    j["worst_margin"] = cert.worst_margin;
    j["all_stable"] = cert.stability.all_stable();
    json entries = json::array();
    for (const auto& e : cert.stability.entries) entries.push_back(entry_to_json(e));
    j["points"] = std::move(entries);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(1, '\t') << '\n';
}

}  // namespace lpvsyn
