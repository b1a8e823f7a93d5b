#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "error.hpp"

namespace qamp {

// How the optomechanical coupling g is fixed.
enum class CouplingMode {
    ratio,      // g = g_ratio * omega_c, pump power back-solved
    from_power  // g follows from the filter pump power P_f
};

// All fields in SI units, angular frequencies in rad/s.
struct ExperimentParams {
    double L_0 = 4.1;
    double T_0 = 30e-6;
    double eps_0 = 10e-6;
    double L_f = 2.0;
    double gamma_f = two_pi * 30e3;
    double T_f = 0.005;
    double eps_f = 2000e-6;
    double omega_m = two_pi * 300e3;
    double M = 40e-9;
    double h = 50e-9;
    double T_m = 0.8;
    double T_bath = 10.0;
    double Q_m = 1e9;
    double P_in = 70e-3;
    double P_f = 3.4;
    double omega_p = two_pi * 303e3;
    double lambda_0 = 1064e-9;
    double A_abs = 10e-6;
    double B_node = 6e-3;
    double Rw_ratio = 2.5;
    double P_carrier_in = 1e-3;

    // model options (not in the parameter table)
    CouplingMode coupling_mode = CouplingMode::ratio;
    double g_ratio = 0.97;
    bool auto_tune = true;       // omega_p = omega_m + optical spring shift
    double chi_phase = pi / 2;   // carrier phase across the filter cavity

    bool operator==(const ExperimentParams&) const = default;
};

inline ExperimentParams table_one() { return {}; }

struct ValidatedParams {
    ExperimentParams p;
    std::vector<std::string> warnings;
};

inline std::pair<double, double> amplitude_coeffs(double T) {
    if (!(T >= 0.0 && T <= 1.0))
        throw Error("model-core", "transmissivity out of [0,1]");
    return {std::sqrt(1.0 - T), std::sqrt(T)};
}

inline ValidatedParams validate(const ExperimentParams& p) {
    auto unit = [](const char* name, double v, const char* what) {
        if (!(v >= 0.0 && v <= 1.0))
            throw Error("model-core", std::string(what) + " out of [0,1]: " + name);
    };
    unit("T_0", p.T_0, "transmissivity");
    unit("T_f", p.T_f, "transmissivity");
    unit("T_m", p.T_m, "transmissivity");
    unit("eps_0", p.eps_0, "loss");
    unit("eps_f", p.eps_f, "loss");
    unit("A_abs", p.A_abs, "absorption");
    unit("B_node", p.B_node, "node ratio");

    if (!(p.M > 0.0)) throw Error("model-core", "mass must be positive: M");
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error("model-core", std::string("must be positive: ") + name);
    };
    positive("L_0", p.L_0);
    positive("L_f", p.L_f);
    positive("gamma_f", p.gamma_f);
    positive("omega_m", p.omega_m);
    positive("h", p.h);
    positive("T_bath", p.T_bath);
    positive("Q_m", p.Q_m);
    positive("P_in", p.P_in);
    positive("P_f", p.P_f);
    positive("omega_p", p.omega_p);
    positive("lambda_0", p.lambda_0);
    positive("Rw_ratio", p.Rw_ratio);
    positive("P_carrier_in", p.P_carrier_in);
    if (!(p.g_ratio >= 0.0) || !std::isfinite(p.g_ratio))
        throw Error("model-core", "g_ratio must be nonnegative");
    if (!std::isfinite(p.chi_phase)) throw Error("model-core", "chi_phase must be finite");

    ValidatedParams v{p, {}};
    // single-pole estimate of the filter bandwidth from its input coupler
    double gf_est = p.T_f * c_light / (4.0 * p.L_f);
    if (std::abs(gf_est - p.gamma_f) > 0.2 * p.gamma_f)
        v.warnings.push_back("gamma_f inconsistent with T_f: stored " + std::to_string(p.gamma_f) +
                             " rad/s, from T_f " + std::to_string(gf_est) + " rad/s");
    return v;
}

}  // namespace qamp
