#pragma once

// JSON configuration: keys are the ExperimentParams field names, SI units,
// frequencies in Hz. Needs nlohmann/json (vendor/json.hpp).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "constants.hpp"
#include "error.hpp"
#include "params.hpp"

namespace qamp {

namespace detail {

struct Field {
    double ExperimentParams::*ptr;
    double scale;  // config value * scale = internal value
};

inline const std::map<std::string, Field>& numeric_fields() {
    static const std::map<std::string, Field> f = {
        {"L_0", {&ExperimentParams::L_0, 1}},
        {"T_0", {&ExperimentParams::T_0, 1}},
        {"eps_0", {&ExperimentParams::eps_0, 1}},
        {"L_f", {&ExperimentParams::L_f, 1}},
        {"gamma_f", {&ExperimentParams::gamma_f, two_pi}},
        {"T_f", {&ExperimentParams::T_f, 1}},
        {"eps_f", {&ExperimentParams::eps_f, 1}},
        {"omega_m", {&ExperimentParams::omega_m, two_pi}},
        {"M", {&ExperimentParams::M, 1}},
        {"h", {&ExperimentParams::h, 1}},
        {"T_m", {&ExperimentParams::T_m, 1}},
        {"T_bath", {&ExperimentParams::T_bath, 1}},
        {"Q_m", {&ExperimentParams::Q_m, 1}},
        {"P_in", {&ExperimentParams::P_in, 1}},
        {"P_f", {&ExperimentParams::P_f, 1}},
        {"omega_p", {&ExperimentParams::omega_p, two_pi}},
        {"lambda_0", {&ExperimentParams::lambda_0, 1}},
        {"A_abs", {&ExperimentParams::A_abs, 1}},
        {"B_node", {&ExperimentParams::B_node, 1}},
        {"Rw_ratio", {&ExperimentParams::Rw_ratio, 1}},
        {"P_carrier_in", {&ExperimentParams::P_carrier_in, 1}},
        {"g_ratio", {&ExperimentParams::g_ratio, 1}},
        {"chi_phase", {&ExperimentParams::chi_phase, 1}},
    };
    return f;
}

// frequency fields may also be written with an explicit _hz suffix
inline std::string canonical_key(const std::string& k) {
    for (const char* base : {"gamma_f", "omega_m", "omega_p"})
        if (k == std::string(base) + "_hz") return base;
    return k;
}

inline void set_key(ExperimentParams& p, const std::string& key_in, const nlohmann::json& v) {
    const std::string key = canonical_key(key_in);
    const auto& f = numeric_fields();
    try {
        if (auto it = f.find(key); it != f.end()) {
            double x = v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>();
            p.*(it->second.ptr) = x * it->second.scale;
        } else if (key == "auto_tune") {
            if (v.is_string()) {
                auto s = v.get<std::string>();
                if (s != "true" && s != "false") throw Error("cli", "auto_tune must be true or false");
                p.auto_tune = s == "true";
            } else {
                p.auto_tune = v.get<bool>();
            }
        } else if (key == "coupling_mode") {
            auto s = v.get<std::string>();
            if (s == "ratio")
                p.coupling_mode = CouplingMode::ratio;
            else if (s == "power")
                p.coupling_mode = CouplingMode::from_power;
            else
                throw Error("cli", "coupling_mode must be \"ratio\" or \"power\"");
        } else {
            throw Error("cli", "unknown key: " + key_in);
        }
    } catch (const nlohmann::json::exception&) {
        throw Error("cli", "bad value for key: " + key_in);
    } catch (const std::invalid_argument&) {
        throw Error("cli", "bad value for key: " + key_in);
    } catch (const std::out_of_range&) {
        throw Error("cli", "bad value for key: " + key_in);
    }
}

}  // namespace detail

inline nlohmann::json params_to_json(const ExperimentParams& p) {
    nlohmann::json j;
    for (const auto& [k, f] : detail::numeric_fields()) j[k] = p.*(f.ptr) / f.scale;
    j["auto_tune"] = p.auto_tune;
    j["coupling_mode"] = p.coupling_mode == CouplingMode::ratio ? "ratio" : "power";
    return j;
}

// defaults <- file <- overrides ("key=value")
inline ExperimentParams load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    ExperimentParams p = table_one();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw Error("cli", "cannot read config: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error& e) {
                throw Error("cli", std::string("malformed config: ") + e.what());
            }
            if (!j.is_object()) throw Error("cli", "malformed config: expected an object");
            for (auto it = j.begin(); it != j.end(); ++it) detail::set_key(p, it.key(), it.value());
        }
    }
    for (const auto& o : overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw Error("cli", "override must be key=value: " + o);
        detail::set_key(p, o.substr(0, eq), nlohmann::json(o.substr(eq + 1)));
    }
    return p;
}

// FNV-1a over the canonical dump of the effective parameters.
inline std::string config_hash(const ExperimentParams& p) {
    std::string s = params_to_json(p).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qamp
