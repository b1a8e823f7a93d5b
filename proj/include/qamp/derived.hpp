#pragma once

#include <cmath>
#include <tuple>

#include "constants.hpp"
#include "params.hpp"

namespace qamp {

struct DerivedQuantities {
    ExperimentParams params;

    double tau = 0, tau_f = 0;
    double r_0 = 0, t_0 = 0, r_f = 0, t_f = 0, r_m = 0, t_m = 0;
    double s_0 = 1, s_f = 1;  // round-trip amplitude survival sqrt(1 - eps)
    double gamma_0 = 0;
    double omega_0 = 0;
    double omega_c = 0;
    double g = 0;
    double delta_os = 0;       // self-consistent optical spring, filled by derive()
    double delta_os_formula = 0;
    double fsr_f = 0;          // Hz
    double gamma_mech = 0;
    double omega_p = 0;        // pump offset actually used
    cd chi{0, 1};

    // coupling bookkeeping
    double g_from_Pf = 0;      // single-mode formula with the stated P_f
    double P_f_formula = 0;    // P_f the single-mode formula needs for g
    double P_f_model = 0;      // sub-cavity pump power used by the field model
    double P_in_model = 0;     // matching input pump power
    double gamma_f_from_Tf = 0;
};

// Single-mode coupling estimate.
inline double coupling_from_power(const DerivedQuantities& d, double P_f) {
    const auto& p = d.params;
    double den = 1.0 - d.r_f * d.r_m;
    return std::sqrt(d.r_m * d.t_m * d.t_m * P_f * d.omega_0 /
                     (den * den * p.M * c_light * p.L_f * p.omega_m));
}

inline double power_from_coupling(const DerivedQuantities& d, double g) {
    double g1 = coupling_from_power(d, 1.0);
    return g1 > 0 ? (g / g1) * (g / g1) : 0.0;
}

// Single-mode optical spring estimate for coupling g.
inline double optical_spring_formula(const DerivedQuantities& d, double g) {
    const auto& p = d.params;
    double den = 1.0 - d.r_f * d.r_m;
    return d.r_m * d.t_m * d.t_m * g * g * p.omega_m /
           (4.0 * den * den * (p.gamma_f * p.gamma_f + p.omega_m * p.omega_m));
}

// Everything that has a closed form. The coupling g here is the single-mode
// value; derive() in model.hpp replaces it with the field-model calibration.
inline DerivedQuantities derive_closed_form(const ValidatedParams& vp) {
    const auto& p = vp.p;
    DerivedQuantities d;
    d.params = p;
    d.tau = 2.0 * p.L_0 / c_light;
    d.tau_f = 2.0 * p.L_f / c_light;
    std::tie(d.r_0, d.t_0) = amplitude_coeffs(p.T_0);
    std::tie(d.r_f, d.t_f) = amplitude_coeffs(p.T_f);
    std::tie(d.r_m, d.t_m) = amplitude_coeffs(p.T_m);
    d.s_0 = std::sqrt(1.0 - p.eps_0);
    d.s_f = std::sqrt(1.0 - p.eps_f);
    d.gamma_0 = p.T_0 / (2.0 * d.tau);
    d.omega_0 = two_pi * c_light / p.lambda_0;
    d.omega_c = 0.5 * c_light * std::sqrt(p.T_0 / (p.L_0 * p.L_f));
    d.fsr_f = c_light / (2.0 * p.L_f);
    d.gamma_mech = p.omega_m / p.Q_m;
    d.chi = std::polar(1.0, p.chi_phase);
    d.gamma_f_from_Tf = p.T_f / (2.0 * d.tau_f);

    d.g_from_Pf = coupling_from_power(d, p.P_f);
    d.g = p.coupling_mode == CouplingMode::ratio ? p.g_ratio * d.omega_c : d.g_from_Pf;
    d.P_f_formula = power_from_coupling(d, d.g);
    d.delta_os_formula = optical_spring_formula(d, d.g);
    d.delta_os = d.delta_os_formula;
    d.omega_p = p.auto_tune ? p.omega_m + d.delta_os : p.omega_p;
    return d;
}

}  // namespace qamp
