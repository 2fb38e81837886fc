#include "stagechain/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stagechain/error.hpp"

namespace stagechain::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, int line) {
    const std::string t = trim(text);
    if (t.empty())
        throw Error("cli.MalformedNumber",
                    "line " + std::to_string(line) + ": empty value");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw Error("cli.MalformedNumber", "line " + std::to_string(line) +
                                               ": cannot parse '" + t + "'");
    return v;
}

} // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::map<std::string, double*> slots = {
        {"a1", &cfg.params.a1},         {"b1", &cfg.params.b1},
        {"c1", &cfg.params.c1},         {"c2", &cfg.params.c2},
        {"d1", &cfg.params.d1},         {"d2", &cfg.params.d2},
        {"d3", &cfg.params.d3},         {"alpha1", &cfg.params.alpha1},
        {"alpha2", &cfg.params.alpha2}, {"tau", &cfg.params.tau},
    };
    const std::set<std::string> required = {"a1", "b1", "c1",     "c2",     "d1",
                                            "d2", "d3", "alpha1", "alpha2", "tau"};
    std::map<std::string, std::optional<double>*> optionals = {
        {"t_end", &cfg.t_end},
        {"step", &cfg.step},
        {"x0", &cfg.x0},
        {"y0", &cfg.y0},
        {"z1_0", &cfg.z1_0},
        {"z2_0", &cfg.z2_0},
        {"tau_min", &cfg.tau_min},
        {"tau_max", &cfg.tau_max},
        {"tau_step", &cfg.tau_step},
        {"transient_fraction", &cfg.transient_fraction},
    };

    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty() || text[0] == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw Error("cli.MalformedLine", "line " + std::to_string(line) +
                                                 ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = text.substr(eq + 1);
        if (key.empty())
            throw Error("cli.MalformedLine",
                        "line " + std::to_string(line) + ": missing key");
        const auto slot = slots.find(key);
        const auto opt = optionals.find(key);
        if (slot == slots.end() && opt == optionals.end())
            throw Error("cli.UnknownKey", "line " + std::to_string(line) +
                                              ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw Error("cli.DuplicateKey", "line " + std::to_string(line) +
                                                ": duplicate key '" + key + "'");
        const double v = parse_number(value, line);
        if (slot != slots.end())
            *slot->second = v;
        else
            *opt->second = v;
    }

    std::string missing;
    for (const auto& key : required) {
        if (!seen.count(key)) {
            if (!missing.empty()) missing += ", ";
            missing += key;
        }
    }
    if (!missing.empty())
        throw Error("cli.MissingKey", "missing mandatory keys: " + missing);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli.FileNotFound", "cannot open config file: " + path);
    return parse_config(in);
}

} // namespace stagechain::config
