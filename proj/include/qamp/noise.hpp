#pragma once

#include <cmath>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "fields.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sideband.hpp"

namespace qamp {

// Displacement-referred noise at one frequency, in units of the input vacuum
// (one quantum per port), before normalisation.
struct NoiseColumns {
    double input_vacuum = 0, loss_main = 0, loss_filter = 0, thermal = 0;
    double total() const { return input_vacuum + loss_main + loss_filter + thermal; }
};

// Force PSD 4 k_B M omega_m T/Q relative to one vacuum quantum hbar omega_0.
inline double thermal_scale(const DerivedQuantities& d) {
    const auto& p = d.params;
    return 4.0 * k_B * p.M * p.omega_m / (hbar * d.omega_0);
}

inline NoiseColumns noise_columns(const OperatingPoint& op, double Omega, double T_over_Q) {
    if (!(T_over_Q >= 0.0)) throw Error("noise-budget", "T/Q_m must be nonnegative");
    auto t = solve_all(assemble(op.dq, op.pump, Omega, op.A_carrier));
    double sig = std::norm(t(a_out, 0, d_x));
    auto pw = [&](Drive k) { return std::norm(t(a_out, 0, k)); };
    NoiseColumns n;
    n.input_vacuum = (pw(d_in_s) + pw(d_in_i)) / sig;
    n.loss_main = (pw(d_loss0_s) + pw(d_loss0_i)) / sig;
    n.loss_filter = (pw(d_lossf_s) + pw(d_lossf_i)) / sig;
    n.thermal = pw(d_force) * thermal_scale(op.dq) * T_over_Q / sig;
    return n;
}

// Pump-off total at DC; every budget column is divided by it.
inline double budget_normalisation(const OperatingPoint& op) {
    return noise_columns(pump_off(op), 0.0, 0.0).total();
}

struct LossNoise {
    double analytic = 0;
    double full = 0;
};

// Main-cavity loss: 4 eps_0 / T_eff and the loss-port injection.
inline LossNoise loss_noise_main(const OperatingPoint& op, double Omega) {
    const auto& d = op.dq;
    LossNoise r;
    r.analytic = 4.0 * d.params.eps_0 / effective_transmissivity(d);
    r.full = noise_columns(op, Omega, 0.0).loss_main / budget_normalisation(op);
    return r;
}

// Filter-cavity loss, lowest order: 2 (gamma_0^2 + w^2) tau eps_f / (T_eff gamma_0).
inline LossNoise loss_noise_filter(const OperatingPoint& op, double Omega) {
    const auto& d = op.dq;
    LossNoise r;
    r.analytic = 2.0 * (d.gamma_0 * d.gamma_0 + Omega * Omega) * d.tau * d.params.eps_f /
                 (effective_transmissivity(d) * d.gamma_0);
    r.full = noise_columns(op, Omega, 0.0).loss_filter / budget_normalisation(op);
    return r;
}

inline double thermal_noise(const OperatingPoint& op, double T_over_Q, double Omega) {
    return noise_columns(op, Omega, T_over_Q).thermal / budget_normalisation(op);
}

inline double equivalent_loss(const DerivedQuantities& d, double T_over_Q) {
    if (d.g == 0.0) throw Error("noise-budget", "equivalent loss undefined without optomechanical coupling");
    return k_B * d.gamma_0 * T_over_Q / (hbar * d.g * d.g);
}

struct NoiseBudget {
    std::vector<double> f_hz;
    std::vector<double> input_vacuum, loss_main, loss_filter, thermal, total, pump_off;
    std::vector<double> loss_main_analytic, loss_filter_analytic;
    double normalisation = 1;  // pump-off DC total that was divided out
    double T_over_Q = 0;

    double improvement(std::size_t i) const { return pump_off[i] / total[i]; }

    struct Peak {
        double factor = 0, f_hz = 0;
    };
    Peak peak_improvement(double f_lo = 0, double f_hi = INFINITY) const {
        Peak p;
        for (std::size_t i = 0; i < f_hz.size(); ++i) {
            if (f_hz[i] < f_lo || f_hz[i] > f_hi) continue;
            double v = improvement(i);
            if (v > p.factor) p = {v, f_hz[i]};
        }
        return p;
    }
};

inline NoiseBudget total_budget(const OperatingPoint& op, const std::vector<double>& f_hz, double T_over_Q) {
    if (!(T_over_Q >= 0.0)) throw Error("noise-budget", "T/Q_m must be nonnegative");
    NoiseBudget b;
    const std::size_t n = f_hz.size();
    b.f_hz = f_hz;
    b.T_over_Q = T_over_Q;
    for (auto* v : {&b.input_vacuum, &b.loss_main, &b.loss_filter, &b.thermal, &b.total, &b.pump_off,
                    &b.loss_main_analytic, &b.loss_filter_analytic})
        v->assign(n, 0.0);
    const OperatingPoint off = pump_off(op);
    b.normalisation = noise_columns(off, 0.0, 0.0).total();
    const double T_eff = effective_transmissivity(op.dq);
    const auto& d = op.dq;
    parallel_for(n, [&](std::size_t i) {
        double W = two_pi * f_hz[i];
        auto c = noise_columns(op, W, T_over_Q);
        double N = b.normalisation;
        b.input_vacuum[i] = c.input_vacuum / N;
        b.loss_main[i] = c.loss_main / N;
        b.loss_filter[i] = c.loss_filter / N;
        b.thermal[i] = c.thermal / N;
        b.total[i] = b.input_vacuum[i] + b.loss_main[i] + b.loss_filter[i] + b.thermal[i];
        b.pump_off[i] = op.pump.is_off() ? b.total[i] : noise_columns(off, W, 0.0).total() / N;
        b.loss_main_analytic[i] = 4.0 * d.params.eps_0 / T_eff;
        b.loss_filter_analytic[i] =
            2.0 * (d.gamma_0 * d.gamma_0 + W * W) * d.tau * d.params.eps_f / (T_eff * d.gamma_0);
    });
    return b;
}

}  // namespace qamp
