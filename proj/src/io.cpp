#include "qkflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

namespace qkf::io {

std::string format_full(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_grid_csv(const flow::GraphPatch& p, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << (p.dim == 2 ? "x,y,u\n" : "x,u\n");
    for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
            out << format_full(p.x(i));
            if (p.dim == 2) out << ',' << format_full(p.y(j));
            out << ',' << format_full(p.u[static_cast<std::size_t>(p.idx(i, j))]) << '\n';
        }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<double> read_grid_values(const std::string& path, std::int64_t expected)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty grid file: " + path);

    std::vector<double> u;
    u.reserve(static_cast<std::size_t>(std::max<std::int64_t>(expected, 0)));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) throw ConfigError("malformed grid row: " + line);
        u.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    if (expected >= 0 && static_cast<std::int64_t>(u.size()) != expected)
        throw ConfigError("grid file " + path + " has " + std::to_string(u.size()) +
                          " rows, expected " + std::to_string(expected));
    return u;
}

void write_profile_csv(const translator::TranslatorProfile& p,
                       const translator::ProfilePointData& d, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "r,u,up,kappa_rad,kappa_ang,residual\n";
    for (std::size_t i = 0; i < p.size(); ++i)
        out << format_full(p.r[i]) << ',' << format_full(p.u[i]) << ','
            << format_full(p.up[i]) << ',' << format_full(d.kappa_rad[i]) << ','
            << format_full(d.kappa_ang[i]) << ',' << format_full(d.residual[i]) << '\n';
    if (!out) throw ConfigError("write failed: " + path);
}

nlohmann::json report_to_json(const monitors::MonitorReport& rep)
{
    nlohmann::json j;
    j["times"] = rep.times;
    nlohmann::json series = nlohmann::json::object();
    for (const auto& [name, points] : rep.series) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [t, v] : points) arr.push_back({t, v});
        series[name] = std::move(arr);
    }
    j["series"] = std::move(series);
    nlohmann::json flags = nlohmann::json::object();
    for (const auto& [name, f] : rep.flags)
        flags[name] = {{"pass", f.pass}, {"message", f.message}};
    j["flags"] = std::move(flags);
    return j;
}

void write_report(const monitors::MonitorReport& rep, const std::string& dir)
{
    write_json(report_to_json(rep), dir + "/report.json");
    for (const auto& [name, points] : rep.series) {
        std::ofstream out(dir + "/series_" + name + ".csv");
        if (!out) throw ConfigError("cannot open series file in " + dir);
        out << "t,value\n";
        for (const auto& [t, v] : points) out << format_full(t) << ',' << format_full(v) << '\n';
    }
}

void write_json(const nlohmann::json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw ConfigError("write failed: " + path);
}

nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

} // namespace qkf::io
