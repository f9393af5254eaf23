#include "lpvsyn/frf_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lpvsyn {

using nlohmann::json;

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::S: return "S";
        case Channel::SG: return "SG";
        case Channel::KS: return "KS";
        case Channel::T: return "T";
    }
    return "?";
}

Channel channel_from_name(const std::string& name) {
    if (name == "S") return Channel::S;
    if (name == "SG") return Channel::SG;
    if (name == "KS") return Channel::KS;
    if (name == "T") return Channel::T;
    throw UnknownChannel(name);
}

FrequencyGrid FrequencyGrid::continuous(std::vector<double> omegas) {
    FrequencyGrid g;
    g.omegas = std::move(omegas);
    g.domain = Domain::Continuous;
    g.validate();
    return g;
}

FrequencyGrid FrequencyGrid::discrete(std::vector<double> omegas, double Ts) {
    FrequencyGrid g;
    g.omegas = std::move(omegas);
    g.domain = Domain::Discrete;
    g.Ts = Ts;
    g.validate();
    return g;
}

FrequencyGrid FrequencyGrid::log_spaced(double wmin, double wmax, int n, Domain domain, double Ts) {
    if (n < 2 || wmin <= 0 || wmax <= wmin)
        throw InvalidArgument("log_spaced grid needs n >= 2 and 0 < wmin < wmax");
    std::vector<double> w(n);
    const double l0 = std::log10(wmin), l1 = std::log10(wmax);
    for (int k = 0; k < n; ++k) w[k] = std::pow(10.0, l0 + (l1 - l0) * k / (n - 1));
    w.front() = wmin;
    w.back() = wmax;  // endpoints exact
    FrequencyGrid g;
    g.omegas = std::move(w);
    g.domain = domain;
    g.Ts = Ts;
    g.validate();
    return g;
}

Complex FrequencyGrid::lambda(std::size_t k) const {
    const double w = omegas.at(k);
    if (domain == Domain::Discrete) return std::exp(Complex(0.0, w * Ts));
    return Complex(0.0, w);
}

void FrequencyGrid::validate() const {
    if (omegas.empty()) throw InvalidArgument("empty frequency grid");
    if (omegas.front() < 0) throw NonMonotoneGrid("negative frequency");
    for (std::size_t k = 1; k < omegas.size(); ++k)
        if (!(omegas[k] > omegas[k - 1]))
            throw NonMonotoneGrid("omegas must be strictly increasing at index " + std::to_string(k));
    for (double w : omegas)
        if (!std::isfinite(w)) throw NanSample("non-finite frequency");
    if (domain == Domain::Discrete) {
        if (!(Ts > 0)) throw InvalidArgument("discrete grid needs Ts > 0");
        const double nyq = M_PI / Ts;
        if (omegas.back() > nyq * (1 + 1e-12))
            throw NonMonotoneGrid("frequency above Nyquist " + std::to_string(nyq));
    }
}

OperatingPointSet OperatingPointSet::equidistant(double pmin, double pmax, int n) {
    if (n < 1 || !(pmax > pmin)) throw InvalidArgument("equidistant needs n >= 1, pmax > pmin");
    OperatingPointSet s;
    s.pmin = pmin;
    s.pmax = pmax;
    s.points.resize(n);
    for (int i = 0; i < n; ++i)
        s.points[i] = (n == 1) ? pmin : pmin + (pmax - pmin) * i / (n - 1);
    s.validate();
    return s;
}

void OperatingPointSet::validate() const {
    if (points.empty()) throw InvalidArgument("empty operating point set");
    for (double p : points) {
        if (!std::isfinite(p)) throw NanSample("non-finite operating point");
        if (p < pmin - 1e-12 || p > pmax + 1e-12)
            throw OutOfRange("operating point " + std::to_string(p) + " outside range");
    }
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j]) throw InvalidArgument("duplicate operating point");
}

void FrfDataset::validate() const {
    grid.validate();
    points.validate();
    const auto nw = static_cast<Eigen::Index>(grid.size());
    const auto np = static_cast<Eigen::Index>(points.size());
    if (samplesN.rows() != nw || samplesN.cols() != np || samplesD.rows() != nw ||
        samplesD.cols() != np)
        throw MissingCell("sample arrays must be |grid| x |points|");
    double min_sum = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < nw; ++k)
        for (Eigen::Index t = 0; t < np; ++t) {
            const Complex n = samplesN(k, t), d = samplesD(k, t);
            if (!std::isfinite(n.real()) || !std::isfinite(n.imag()) || !std::isfinite(d.real()) ||
                !std::isfinite(d.imag()))
                throw NanSample("at frequency index " + std::to_string(k));
            min_sum = std::min(min_sum, std::abs(n) + std::abs(d));
        }
    if (!(min_sum > 0)) throw InvalidArgument("factors vanish simultaneously (coprimeness proxy)");
}

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void FrfDataset::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "omega_rad_s,p,re_N,im_N,re_D,im_D\n";
    // rows sorted by (p, omega)
    for (std::size_t t = 0; t < points.size(); ++t)
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const Complex n = samplesN(k, t), d = samplesD(k, t);
            out << fmt_double(grid.omegas[k]) << ',' << fmt_double(points.points[t]) << ','
                << fmt_double(n.real()) << ',' << fmt_double(n.imag()) << ',' << fmt_double(d.real())
                << ',' << fmt_double(d.imag()) << '\n';
        }
    // grid metadata lives in a trailing comment so a bare CSV stays loadable
    out << "# domain=" << (grid.domain == Domain::Discrete ? "discrete" : "continuous");
    if (grid.domain == Domain::Discrete) out << " Ts=" << fmt_double(grid.Ts);
    out << "\n";
    if (!out) throw IoError("write failed: " + path);
}

FrfDataset FrfDataset::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file " + path);
    struct Row {
        double w, p;
        Complex n, d;
    };
    std::vector<Row> rows;
    Domain domain = Domain::Discrete;
    double Ts = 0.0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("domain=continuous") != std::string::npos) {
                domain = Domain::Continuous;
                have_meta = true;
            } else if (line.find("domain=discrete") != std::string::npos) {
                domain = Domain::Discrete;
                have_meta = true;
                auto pos = line.find("Ts=");
                if (pos != std::string::npos) Ts = std::stod(line.substr(pos + 3));
            }
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        double vals[6];
        for (int i = 0; i < 6; ++i) {
            if (!std::getline(ss, cell, ',')) throw MissingCell("short row: " + line);
            try {
                vals[i] = std::stod(cell);
            } catch (const std::exception&) {
                throw NanSample("unparseable cell '" + cell + "'");
            }
        }
        rows.push_back({vals[0], vals[1], {vals[2], vals[3]}, {vals[4], vals[5]}});
    }
    if (rows.empty()) throw MissingCell("no data rows in " + path);
    if (!have_meta && Ts == 0.0) {
        // assume discrete with Nyquist at the top of the grid when unstated
        domain = Domain::Discrete;
        double wmax = 0;
        for (auto& r : rows) wmax = std::max(wmax, r.w);
        Ts = M_PI / wmax;
    }

    // collect distinct points (file order) and the first point's grid order
    std::vector<double> pts;
    for (auto& r : rows)
        if (std::find(pts.begin(), pts.end(), r.p) == pts.end()) pts.push_back(r.p);
    std::vector<double> omegas;
    for (auto& r : rows)
        if (r.p == pts.front()) omegas.push_back(r.w);
    for (std::size_t k = 1; k < omegas.size(); ++k)
        if (!(omegas[k] > omegas[k - 1])) throw NonMonotoneGrid("CSV rows not omega-sorted");

    FrfDataset ds;
    ds.grid.omegas = omegas;
    ds.grid.domain = domain;
    ds.grid.Ts = Ts;
    ds.points.points = pts;
    auto mm = std::minmax_element(pts.begin(), pts.end());
    ds.points.pmin = *mm.first;
    ds.points.pmax = *mm.second;
    const auto nw = static_cast<Eigen::Index>(omegas.size());
    const auto np = static_cast<Eigen::Index>(pts.size());
    if (rows.size() != static_cast<std::size_t>(nw * np))
        throw MissingCell("expected " + std::to_string(nw * np) + " rows, got " +
                          std::to_string(rows.size()));
    ds.samplesN.resize(nw, np);
    ds.samplesD.resize(nw, np);
    Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(nw, np);
    for (auto& r : rows) {
        auto ti = std::find(pts.begin(), pts.end(), r.p) - pts.begin();
        auto ki = std::find(omegas.begin(), omegas.end(), r.w) - omegas.begin();
        if (ki == static_cast<long>(omegas.size()))
            throw MissingCell("row frequency not on the common grid");
        if (seen(ki, ti)++) throw MissingCell("duplicate cell in CSV");
        ds.samplesN(ki, ti) = r.n;
        ds.samplesD(ki, ti) = r.d;
    }
    if ((seen.array() != 1).any()) throw MissingCell("incomplete grid x points coverage");
    ds.validate();
    return ds;
}

namespace {

json complex_to_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw NanSample("complex sample must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void FrfDataset::save_json(const std::string& path) const {
    json j;
    j["grid"]["domain"] = grid.domain == Domain::Discrete ? "discrete" : "continuous";
    if (grid.domain == Domain::Discrete) j["grid"]["Ts"] = grid.Ts;
    j["grid"]["omegas"] = grid.omegas;
    j["points"] = points.points;
    json N = json::array(), D = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        json rn = json::array(), rd = json::array();
        for (std::size_t t = 0; t < points.size(); ++t) {
            rn.push_back(complex_to_json(samplesN(k, t)));
            rd.push_back(complex_to_json(samplesD(k, t)));
        }
        N.push_back(std::move(rn));
        D.push_back(std::move(rd));
    }
    j["samples"]["N"] = std::move(N);
    j["samples"]["D"] = std::move(D);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(1, '\t') << '\n';
    if (!out) throw IoError("write failed: " + path);
}

FrfDataset FrfDataset::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("JSON parse error in " + path + ": " + e.what());
    }
    FrfDataset ds;
    const std::string dom = j.at("grid").at("domain").get<std::string>();
    ds.grid.domain = dom == "continuous" ? Domain::Continuous : Domain::Discrete;
    if (ds.grid.domain == Domain::Discrete) ds.grid.Ts = j.at("grid").at("Ts").get<double>();
    ds.grid.omegas = j.at("grid").at("omegas").get<std::vector<double>>();
    ds.points.points = j.at("points").get<std::vector<double>>();
    auto mm = std::minmax_element(ds.points.points.begin(), ds.points.points.end());
    ds.points.pmin = *mm.first;
    ds.points.pmax = *mm.second;
    const auto& N = j.at("samples").at("N");
    const auto& D = j.at("samples").at("D");
    const auto nw = static_cast<Eigen::Index>(ds.grid.size());
    const auto np = static_cast<Eigen::Index>(ds.points.size());
    if (static_cast<Eigen::Index>(N.size()) != nw || static_cast<Eigen::Index>(D.size()) != nw)
        throw MissingCell("samples row count mismatch");
    ds.samplesN.resize(nw, np);
    ds.samplesD.resize(nw, np);
    for (Eigen::Index k = 0; k < nw; ++k) {
        if (static_cast<Eigen::Index>(N[k].size()) != np ||
            static_cast<Eigen::Index>(D[k].size()) != np)
            throw MissingCell("samples column count mismatch at row " + std::to_string(k));
        for (Eigen::Index t = 0; t < np; ++t) {
            ds.samplesN(k, t) = complex_from_json(N[k][t]);
            ds.samplesD(k, t) = complex_from_json(D[k][t]);
        }
    }
    ds.validate();
    return ds;
}

FrfDataset load_frf_dataset(const std::string& path, FileFormat format) {
    return format == FileFormat::Csv ? FrfDataset::load_csv(path) : FrfDataset::load_json(path);
}

void save_frf_dataset(const FrfDataset& data, const std::string& path, FileFormat format) {
    if (format == FileFormat::Csv)
        data.save_csv(path);
    else
        data.save_json(path);
}

}  // namespace lpvsyn
