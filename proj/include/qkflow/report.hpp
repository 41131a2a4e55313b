#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qkf::monitors {

/// Named time series of scalar diagnostics plus pass/fail flags.
struct MonitorReport {
    std::vector<double> times;
    std::map<std::string, std::vector<std::pair<double, double>>> series;

    struct Flag {
        bool pass = true;
        std::string message;
    };
    std::map<std::string, Flag> flags;

    void append(const std::string& name, double t, double value)
    {
        auto& s = series[name];
        if (!s.empty() && !(t > s.back().first))
            throw std::logic_error("series '" + name + "' requires strictly increasing time");
        s.emplace_back(t, value);
    }

    void set_flag(const std::string& name, bool pass, std::string message)
    {
        flags[name] = Flag{pass, std::move(message)};
    }

    bool all_pass() const
    {
        for (const auto& [name, f] : flags)
            if (!f.pass) return false;
        return true;
    }
};

} // namespace qkf::monitors
