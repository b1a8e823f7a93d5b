#pragma once

#include <cmath>

#include "constants.hpp"
#include "error.hpp"
#include "params.hpp"

namespace qamp {

struct ThermalState {
    double T_membrane = 0;  // K
    double R = 0;           // K/W
    double P_a = 0;         // W
    int iterations = 0;
    double residual = 0;    // K
};

enum class ThermalMethod { bracketed, iteration };

struct ThermalOptions {
    ThermalMethod method = ThermalMethod::bracketed;
    bool include_bath = false;  // T = T_bath + R(T) P_a instead of T = R(T) P_a
    double tol = 1e-10;
};

inline constexpr double alpha_ref_T = 10.0;
inline constexpr double alpha_valid_lo = 3.0, alpha_valid_hi = 30.0;

// Thermal conductivity of the membrane, linearised about 10 K, W/(m K).
inline double conductivity(double T) { return 0.23 + 0.032 * (T - alpha_ref_T); }

inline double thermal_resistance(const ExperimentParams& p, double T) {
    if (!(T > 0)) throw Error("thermal-model", "temperature must be positive");
    double a = conductivity(T);
    if (a <= 0) throw Error("thermal-model", "conductivity model out of validity range");
    return p.Rw_ratio / (two_pi * p.h * a);
}

inline double absorbed_power(const ExperimentParams& p) { return p.A_abs * p.B_node * p.P_f; }

inline ThermalState solve_temperature(const ExperimentParams& p, const ThermalOptions& o = {}) {
    ThermalState s;
    s.P_a = absorbed_power(p);
    double base = o.include_bath ? p.T_bath : 0.0;
    if (s.P_a == 0.0 && base == 0.0) {
        // no heating and no sink temperature: the literal model sits at zero
        s.T_membrane = 0.0;
        s.R = thermal_resistance(p, alpha_ref_T);
        return s;
    }
    auto f = [&](double T) { return T - base - thermal_resistance(p, T) * s.P_a; };

    // alpha > 0 above this temperature
    const double T_floor = alpha_ref_T - 0.23 / 0.032;
    double lo = std::max(0.1, T_floor + 1e-9), hi = 400.0;
    if (f(lo) > 0 || f(hi) < 0) throw Error("thermal-model", "thermal runaway or invalid model");

    double T = 0;
    if (o.method == ThermalMethod::bracketed) {
        int it = 0;
        while (hi - lo > o.tol * std::max(1.0, hi) && it < 200) {
            double mid = 0.5 * (lo + hi);
            (f(mid) < 0 ? lo : hi) = mid;
            ++it;
        }
        T = 0.5 * (lo + hi);
        s.iterations = it;
    } else {
        // damped fixed point starting from the linearisation point
        T = std::max(alpha_ref_T, lo + 1.0);
        int it = 0;
        for (; it < 10000; ++it) {
            double next = base + thermal_resistance(p, T) * s.P_a;
            if (!(next > T_floor)) next = 0.5 * (T + T_floor);
            double upd = 0.5 * T + 0.5 * next;
            if (std::abs(upd - T) < o.tol) {
                T = upd;
                break;
            }
            T = upd;
        }
        if (it == 10000) throw Error("thermal-model", "thermal runaway or invalid model");
        s.iterations = it + 1;
    }
    if (T <= alpha_valid_lo || T >= alpha_valid_hi)
        throw Error("thermal-model", "conductivity model out of validity range (T = " + std::to_string(T) + " K)");
    s.T_membrane = T;
    s.R = thermal_resistance(p, T);
    s.residual = std::abs(T - base - s.R * s.P_a);
    if (s.residual > 1e-6) throw Error("thermal-model", "fixed point not reached");
    return s;
}

// T/Q_m with the membrane temperature from the self-heating fixed point.
inline double t_over_q_auto(const ExperimentParams& p, const ThermalOptions& o = {}) {
    return solve_temperature(p, o).T_membrane / p.Q_m;
}

}  // namespace qamp
