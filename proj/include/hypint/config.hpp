#pragma once

// Sectioned key-value configuration files (INI-style) driving the CLI:
//
//     # comment
//     [problem]
//     a = u
//     f = -ut + (2/u)*ut^2
//
// Sections: problem, reduction, family, linear, grid, output, tolerances,
// params. Unknown sections and keys are rejected; [params] declares named
// numeric constants usable inside every expression.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypint/expr.hpp"

namespace hypint {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigValue {
    std::string text;
    int line = 0;
};

class Config {
public:
    using Section = std::map<std::string, ConfigValue>;

    std::map<std::string, Section> sections;

    bool has_section(const std::string& name) const { return sections.count(name) > 0; }

    const Section& section(const std::string& name) const {
        auto it = sections.find(name);
        if (it == sections.end())
            throw ConfigError("missing required section [" + name + "]");
        return it->second;
    }

    std::optional<std::string> find(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        if (s == sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second.text;
    }

    std::string get(const std::string& sec, const std::string& key) const {
        auto v = find(sec, key);
        if (!v)
            throw ConfigError("missing required key '" + key + "' in section [" + sec + "]");
        return *v;
    }

    std::string get_or(const std::string& sec, const std::string& key,
                       const std::string& fallback) const {
        auto v = find(sec, key);
        return v ? *v : fallback;
    }

    double number(const std::string& sec, const std::string& key) const {
        return parse_number(get(sec, key), sec, key);
    }
    double number_or(const std::string& sec, const std::string& key, double fallback) const {
        auto v = find(sec, key);
        return v ? parse_number(*v, sec, key) : fallback;
    }
    int integer_or(const std::string& sec, const std::string& key, int fallback) const {
        double v = number_or(sec, key, static_cast<double>(fallback));
        return static_cast<int>(v);
    }

    /// Numeric constants declared in [params].
    std::map<std::string, double> params() const {
        std::map<std::string, double> out;
        auto it = sections.find("params");
        if (it == sections.end()) return out;
        for (const auto& [key, val] : it->second)
            out[key] = parse_number(val.text, "params", key);
        return out;
    }

    /// Parse an expression value; [params] names are substituted as constants.
    Expr expr(const std::string& sec, const std::string& key) const {
        return make_expr(get(sec, key), sec, key);
    }
    Expr expr_or(const std::string& sec, const std::string& key, const Expr& fallback) const {
        auto v = find(sec, key);
        return v ? make_expr(*v, sec, key) : fallback;
    }

private:
    static double parse_number(const std::string& text, const std::string& sec,
                               const std::string& key) {
        try {
            std::size_t used = 0;
            double v = std::stod(text, &used);
            while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used])))
                ++used;
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("value of '" + key + "' in [" + sec + "] is not a number: '" +
                              text + "'");
        }
    }

    Expr make_expr(const std::string& text, const std::string& sec, const std::string& key) const {
        auto prm = params();
        std::set<std::string> names;
        for (auto& [k, v] : prm) names.insert(k);
        try {
            Expr e = parse_expr(text, names);
            for (auto& [k, v] : prm) e = e.substitute(k, Expr::constant(v));
            return e.simplified();
        } catch (const ParseError& pe) {
            throw ConfigError("expression '" + key + "' in [" + sec + "]: " + pe.what());
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"problem", {"a", "f"}},
        {"reduction", {"branch", "g", "u0", "t_start"}},
        {"family",
         {"id", "u0", "a", "Phi", "q", "q1", "q2", "alpha0", "alpha1", "alpha2", "beta0",
          "beta1", "beta2", "gamma0", "gamma1", "gamma2", "c", "c0", "c1", "c2", "k0", "k1",
          "t0", "h0"}},
        {"linear",
         {"spec", "a", "A", "H", "B", "G", "c", "q1", "c0", "k0", "h0", "h", "f1", "f2",
          "phi", "psi", "x_ref"}},
        {"grid",
         {"x0", "x1", "t0", "t1", "u_lo", "u_hi", "ux_lo", "ux_hi", "nx", "nt", "nu", "nux",
          "n_sigma", "h_t", "t_end", "dx", "dt", "fd_h", "fd_order", "n_points", "x_pad",
          "t_back"}},
        {"output", {"strip_csv", "field_csv"}},
        {"tolerances", {"con1", "det", "structural", "fd", "compare"}},
        {"params", {}},  // free-form numeric names
    };
    return schema;
}

}  // namespace detail

/// Parse and validate a configuration document.
inline Config parse_config(std::istream& in) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (!detail::config_schema().count(section))
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            cfg.sections[section];  // present even if empty
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        std::string key = detail::trim(s.substr(0, eq));
        std::string value = detail::trim(s.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        const auto& allowed = detail::config_schema().at(section);
        if (!allowed.empty() && !allowed.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key +
                              "' in section [" + section + "]");
        if (cfg.sections[section].count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.sections[section][key] = {value, lineno};
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

}  // namespace hypint
