#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpvsyn/analysis.hpp"
#include "lpvsyn/conic.hpp"
#include "lpvsyn/controller_param.hpp"
#include "lpvsyn/disk_benchmark.hpp"
#include "lpvsyn/frf_data.hpp"
#include "lpvsyn/realization.hpp"
#include "lpvsyn/simulation.hpp"
#include "lpvsyn/synthesis.hpp"
#include "lpvsyn/weights.hpp"

using namespace lpvsyn;
using nlohmann::json;

namespace {

FileFormat format_for(const std::string& path, const std::string& flag) {
    if (flag == "csv") return FileFormat::Csv;
    if (flag == "json") return FileFormat::Json;
    if (flag.empty()) {
        if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return FileFormat::Json;
        return FileFormat::Csv;
    }
    throw InvalidArgument("unknown format '" + flag + "'");
}

// flat-key config file; flags given on the command line win
json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(std::string("config parse error: ") + e.what());
    }
    return j;
}

template <typename T>
void config_fill(const CLI::Option* opt, const json& cfg, const char* key, T& value) {
    if (opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

WeightSet resolve_weights(const std::string& path, double Ts) {
    if (path.empty()) return WeightSet::defaults(Ts);
    return WeightSet::load_json(path);
}

int cmd_generate(const std::string& out, const std::string& format, int nfreq, int npoints,
                 double Ts, double wmin, double wmax) {
    const LpvStateSpace lpv = build_unbalanced_disk(DiskParameters{});
    const FrequencyGrid grid = FrequencyGrid::log_spaced(wmin, wmax, nfreq, Domain::Discrete, Ts);
    const OperatingPointSet pts = OperatingPointSet::equidistant(0.0, 1.0, npoints);
    const FrfDataset ds = generate_dataset(lpv, Ts, grid, pts);
    save_frf_dataset(ds, out, format_for(out, format));
    std::printf("wrote %zux%zu dataset to %s\n", ds.grid.size(), ds.points.size(), out.c_str());
    return 0;
}

int cmd_synthesize(const std::string& data_path, const std::string& weights_path,
                   const std::string& out, const std::string& margins_path, double margin_rel,
                   double gamma_lo, double gamma_hi, double bisect_tol, int order) {
    SynthesisProblem prob;
    prob.data = load_frf_dataset(data_path, format_for(data_path, ""));
    prob.weights = resolve_weights(weights_path, prob.data.grid.Ts);
    prob.param = ControllerParameterization::pulse(order, order, prob.data.grid.Ts);
    prob.margin_rel = margin_rel;
    prob.gamma_lo = gamma_lo;
    prob.gamma_hi = gamma_hi;
    prob.bisect_tol = bisect_tol;
    const SynthesisResult res = bisect(prob);
    res.controller.save_json(out);
    if (!margins_path.empty()) save_margins_csv(res.margins, margins_path);
    std::printf("gamma = %.6g  worst margin = %.3e  bisection steps = %zu\n", res.gamma,
                res.worst_margin, res.iterations.size());
    std::printf("controller written to %s\n", out.c_str());
    return 0;
}

int cmd_analyze(const std::string& data_path, const std::string& controller_path,
                const std::string& weights_path, double gamma, const std::string& out,
                bool expect_stable) {
    const FrfDataset data = load_frf_dataset(data_path, format_for(data_path, ""));
    const ControllerParameterization ctrl = ControllerParameterization::load_json(controller_path);
    bool all_stable = false;
    if (gamma > 0) {
        const WeightSet ws = resolve_weights(weights_path, data.grid.Ts);
        const PerformanceCertificate cert = check_performance(data, ws, ctrl, gamma);
        all_stable = cert.stability.all_stable();
        if (!out.empty()) save_performance_json(cert, out);
        for (const auto& e : cert.stability.entries)
            std::printf("p = %-8.4g winding = %+d  min|Dp| = %.3e  %s\n", e.p, e.winding,
                        e.min_abs_Dp, verdict_name(e.verdict));
        std::printf("performance at gamma = %.6g: %s (worst disk margin %.3e)\n", gamma,
                    cert.pass ? "PASS" : "FAIL", cert.worst_margin);
        if (expect_stable && !cert.pass) return 1;
    } else {
        const StabilityCertificate cert = check_stability(data, ctrl);
        all_stable = cert.all_stable();
        if (!out.empty()) save_stability_json(cert, out);
        for (const auto& e : cert.entries)
            std::printf("p = %-8.4g winding = %+d  min|Dp| = %.3e  %s\n", e.p, e.winding,
                        e.min_abs_Dp, verdict_name(e.verdict));
        std::printf("stability: %s\n", all_stable ? "stable at all points" : "NOT stable everywhere");
    }
    if (expect_stable && !all_stable) return 1;
    return 0;
}

int cmd_simulate(const std::string& controller_path, std::optional<double> frozen_p,
                 bool nonlinear, const std::string& scenario_path, double duration,
                 const std::string& out) {
    const ControllerParameterization ctrl = ControllerParameterization::load_json(controller_path);
    ScheduledFilter filter = realize(ctrl);
    const DiskParameters prm{};
    SimResult res;
    if (frozen_p) {
        const LpvStateSpace lpv = build_unbalanced_disk(prm);
        const StateSpaceModel plant = c2d_zoh(freeze(lpv, *frozen_p), filter.Ts());
        res = simulate_frozen_step(plant, std::move(filter), *frozen_p, duration);
    } else if (nonlinear) {
        SimScenario scen = scenario_path.empty() ? SimScenario::staircase_default()
                                                 : SimScenario::load_json(scenario_path);
        if (duration > 0) scen.duration = duration;
        res = simulate_nonlinear(prm, std::move(filter), scen);
    } else {
        throw InvalidArgument("choose --frozen <p> or --nonlinear");
    }
    res.save_csv(out);
    double emax = 0.0;
    for (std::size_t k = res.e.size() / 2; k < res.e.size(); ++k)
        emax = std::max(emax, std::abs(res.e[k]));
    std::printf("simulated %zu samples; max |e| over the second half = %.4g; wrote %s\n",
                res.time.size(), emax, out.c_str());
    return 0;
}

int cmd_export(const std::string& data_path, const std::string& controller_path,
               const std::string& weights_path, const std::string& out) {
    const FrfDataset data = load_frf_dataset(data_path, format_for(data_path, ""));
    const ControllerParameterization ctrl = ControllerParameterization::load_json(controller_path);
    const WeightSet ws = resolve_weights(weights_path, data.grid.Ts);
    const std::vector<Channel> chans{Channel::S, Channel::SG, Channel::KS, Channel::T};
    std::vector<std::vector<Complex>> wfrf;
    for (Channel c : chans) wfrf.push_back(weight_frf(ws, c, data.grid));
    std::ofstream f(out);
    if (!f) throw IoError("cannot open " + out + " for writing");
    f << "omega_rad_s,p,mag_S,mag_SG,mag_KS,mag_T,mag_W_S,mag_W_SG,mag_W_KS,mag_W_T\n";
    char buf[256];
    for (std::size_t t = 0; t < data.points.size(); ++t) {
        const double p = data.points.points[t];
        for (std::size_t k = 0; k < data.grid.size(); ++k) {
            const double omega = data.grid.omegas[k];
            const Complex Nk = ctrl.eval_factor(Factor::N, omega, p);
            const Complex Dk = ctrl.eval_factor(Factor::D, omega, p);
            const Complex Ng = data.samplesN(k, t), Dg = data.samplesD(k, t);
            const Complex Dp = Dg * Dk + Ng * Nk;
            const double S = std::abs(Dg * Dk / Dp), SG = std::abs(Ng * Dk / Dp);
            const double KS = std::abs(Dg * Nk / Dp), T = std::abs(Ng * Nk / Dp);
            std::snprintf(buf, sizeof(buf),
                          "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", omega,
                          p, S, SG, KS, T, std::abs(wfrf[0][k]), std::abs(wfrf[1][k]),
                          std::abs(wfrf[2][k]), std::abs(wfrf[3][k]));
            f << buf;
        }
    }
    std::printf("wrote closed-loop magnitude table to %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gain-scheduled controller synthesis from frequency-response data"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config with flat keys mirroring the flags");

    // generate-data
    auto* gen = app.add_subcommand("generate-data", "Generate the unbalanced-disk factor dataset");
    std::string gen_out = "dataset.csv", gen_format;
    int gen_freqs = 400, gen_points = 9;
    double gen_ts = 0.005, gen_wmin = 1e-2, gen_wmax = 200.0 * M_PI;
    auto* o_gen_out = gen->add_option("--out", gen_out, "output path");
    gen->add_option("--format", gen_format, "csv|json (default: by extension)");
    auto* o_gen_freqs = gen->add_option("--freqs", gen_freqs, "number of frequency points");
    auto* o_gen_points = gen->add_option("--points", gen_points, "number of operating points");
    auto* o_gen_ts = gen->add_option("--ts", gen_ts, "sampling time (s)");
    gen->add_option("--wmin", gen_wmin, "lowest frequency (rad/s)");
    gen->add_option("--wmax", gen_wmax, "highest frequency (rad/s)");

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "Synthesize a gain-scheduled controller");
    std::string syn_data, syn_weights, syn_out = "controller.json", syn_margins = "margins.csv";
    double syn_margin = 1e-6, syn_lo = 1e-2, syn_hi = 1e3, syn_tol = 1e-3;
    int syn_order = 5;
    auto* o_syn_data = syn->add_option("--data", syn_data, "factor FRF dataset")->required();
    auto* o_syn_weights = syn->add_option("--weights", syn_weights, "weight set JSON");
    auto* o_syn_out = syn->add_option("--out", syn_out, "controller JSON output");
    syn->add_option("--margins", syn_margins, "per-constraint margin CSV");
    syn->add_option("--margin-rel", syn_margin, "strict-inequality floor relative to gamma");
    syn->add_option("--gamma-lo", syn_lo, "bisection lower bound");
    syn->add_option("--gamma-hi", syn_hi, "bisection upper bound");
    syn->add_option("--bisect-tol", syn_tol, "relative bisection tolerance");
    syn->add_option("--order", syn_order, "pulse basis order");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Certify a controller against a dataset");
    std::string ana_data, ana_ctrl, ana_weights, ana_out;
    double ana_gamma = 0.0;
    bool ana_expect = false;
    ana->add_option("--data", ana_data, "factor FRF dataset")->required();
    ana->add_option("--controller", ana_ctrl, "controller JSON")->required();
    ana->add_option("--weights", ana_weights, "weight set JSON (for performance)");
    ana->add_option("--gamma", ana_gamma, "performance level (enables the disk test)");
    ana->add_option("--out", ana_out, "certificate JSON output");
    ana->add_flag("--expect-stable", ana_expect, "exit 1 unless the verdict is stable/pass");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Closed-loop simulation");
    std::string sim_ctrl, sim_scenario, sim_out = "sim.csv";
    double sim_frozen = -1.0, sim_duration = 0.0;
    bool sim_nonlinear = false;
    sim->add_option("--controller", sim_ctrl, "controller JSON")->required();
    auto* o_frozen = sim->add_option("--frozen", sim_frozen, "frozen-loop unit step at this p");
    sim->add_flag("--nonlinear", sim_nonlinear, "nonlinear disk simulation");
    sim->add_option("--scenario", sim_scenario, "scenario JSON (default: staircase)");
    sim->add_option("--duration", sim_duration, "override duration (s)");
    sim->add_option("--out", sim_out, "time-series CSV output");

    // export
    auto* exp = app.add_subcommand("export", "Closed-loop magnitude tables for plotting");
    std::string exp_data, exp_ctrl, exp_weights, exp_out = "bode.csv";
    exp->add_option("--data", exp_data, "factor FRF dataset")->required();
    exp->add_option("--controller", exp_ctrl, "controller JSON")->required();
    exp->add_option("--weights", exp_weights, "weight set JSON");
    exp->add_option("--out", exp_out, "output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const json cfg = load_config(config_path);
        if (gen->parsed()) {
            config_fill(o_gen_out, cfg, "out", gen_out);
            config_fill(o_gen_freqs, cfg, "freqs", gen_freqs);
            config_fill(o_gen_points, cfg, "points", gen_points);
            config_fill(o_gen_ts, cfg, "ts", gen_ts);
            return cmd_generate(gen_out, gen_format, gen_freqs, gen_points, gen_ts, gen_wmin,
                                gen_wmax);
        }
        if (syn->parsed()) {
            config_fill(o_syn_data, cfg, "data", syn_data);
            config_fill(o_syn_weights, cfg, "weights", syn_weights);
            config_fill(o_syn_out, cfg, "out", syn_out);
            return cmd_synthesize(syn_data, syn_weights, syn_out, syn_margins, syn_margin, syn_lo,
                                  syn_hi, syn_tol, syn_order);
        }
        if (ana->parsed())
            return cmd_analyze(ana_data, ana_ctrl, ana_weights, ana_gamma, ana_out, ana_expect);
        if (sim->parsed()) {
            std::optional<double> fp;
            if (o_frozen->count()) fp = sim_frozen;
            return cmd_simulate(sim_ctrl, fp, sim_nonlinear, sim_scenario,
                                sim_duration > 0 ? sim_duration : (fp ? 8.0 : 0.0), sim_out);
        }
        if (exp->parsed()) return cmd_export(exp_data, exp_ctrl, exp_weights, exp_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
