#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lpvsyn/frf_data.hpp"

namespace lpvsyn {

// One shaping filter, either a rational discrete-time transfer function
//   W(z) = (num[0] + num[1] z^-1 + ...) / (den[0] + den[1] z^-1 + ...)
// or raw complex samples matching a frequency grid.
struct Weight {
    enum class Kind { Rational, Samples };
    Kind kind = Kind::Rational;

    std::vector<double> num{1.0};
    std::vector<double> den{1.0};
    std::vector<Complex> samples;

    static Weight constant(double value);
    static Weight rational(std::vector<double> num, std::vector<double> den);
    static Weight sampled(std::vector<Complex> samples);

    // Rational weights must be stable: poles strictly inside the unit circle.
    void validate() const;
    Complex eval(Complex z) const;  // rational only
};

// One weight per four-block channel.
struct WeightSet {
    std::array<Weight, 4> weights;  // indexed by Channel

    Weight& at(Channel c) { return weights[static_cast<int>(c)]; }
    const Weight& at(Channel c) const { return weights[static_cast<int>(c)]; }

    void validate() const;

    // Shaping filters used when none are supplied: integral-action pressure
    // on S, high-frequency roll-off on T, small constant effort/loading
    // bounds on KS and SG.
    static WeightSet defaults(double Ts);

    void save_json(const std::string& path) const;
    static WeightSet load_json(const std::string& path);
};

// W evaluated at every grid frequency: W(e^{i w Ts}) or W(i w) for sampled.
std::vector<Complex> weight_frf(const WeightSet& weights, Channel channel, const FrequencyGrid& grid);

}  // namespace lpvsyn
