#pragma once

#include <algorithm>
#include <cmath>

#include "derived.hpp"
#include "fields.hpp"
#include "params.hpp"
#include "sideband.hpp"

namespace qamp {

// Coupling realised by the field model per watt of sub-cavity pump power,
// read off the residue of the exact gain next to the mechanical pole:
// G - G(g=0) ~ -2i g^2 omega_m tau_f / (omega_m^2 - w^2 + i gamma w).
inline double coupling_sq_per_watt(const DerivedQuantities& d) {
    const auto& p = d.params;
    PumpFieldSet unit = solve_pump_fields(d, 1.0);
    double Pf_unit = std::norm(unit.A_f1);
    double w = -p.omega_m + std::min(5000.0, 0.01 * p.omega_m);
    cd G = gain_exact(d, unit, w);
    cd G0 = gain_exact(d, PumpFieldSet{}, w);
    cd X = (G - G0) * p.M * (p.omega_m * p.omega_m - w * w + I * d.gamma_mech * w);
    return std::abs(X / (-2.0 * I)) / (p.omega_m * d.tau_f * p.M) / Pf_unit;
}

// Sets P_f_model / P_in_model (or g, in power mode) for the current omega_p
// and returns the pump fields.
inline PumpFieldSet calibrate_pump(DerivedQuantities& d) {
    const auto& p = d.params;
    double per_watt = coupling_sq_per_watt(d);
    double Pf_unit = std::norm(solve_pump_fields(d, 1.0).A_f1);
    if (p.coupling_mode == CouplingMode::ratio) {
        if (d.g == 0.0) {
            d.P_f_model = d.P_in_model = 0.0;
            return PumpFieldSet{solve_pump_fields(d, 0.0)};
        }
        if (!(per_watt > 0.0)) throw Error("model-core", "membrane does not couple to the pump");
        d.P_f_model = d.g * d.g / per_watt;
    } else {
        d.P_f_model = p.P_f;
        d.g = std::sqrt(per_watt * p.P_f);
    }
    d.P_in_model = d.P_f_model / Pf_unit;
    return solve_pump_fields(d, d.P_in_model);
}

// Optical spring of the pumped filter cavity with the main cavity sealed off,
// evaluated at the pump offset. Returns the resonance shift in rad/s.
inline double optical_spring_exact(const DerivedQuantities& d, const PumpFieldSet& pump) {
    const auto& p = d.params;
    AssemblyOptions opt;
    opt.seal_main = true;
    // signal at DC <=> mechanical frequency -omega_p
    auto sys = assemble(d, pump, 0.0, 1.0, opt);
    constexpr int n = n_unknowns - 1;
    Eigen::Matrix<cd, n, n> Aoo = sys.A.topLeftCorner<n, n>();
    Eigen::Matrix<cd, n, 1> Aoy = sys.A.topRightCorner<n, 1>();
    Eigen::Matrix<cd, 1, n> Ayo = sys.A.bottomLeftCorner<1, n>();
    cd S = sys.A(y_index, y_index) - (Ayo * Aoo.partialPivLu().solve(Aoy))(0, 0);
    double w = -d.omega_p;
    cd bare = p.M * (p.omega_m * p.omega_m - w * w + I * d.gamma_mech * w);
    double K = (bare - S).real();
    double wr2 = p.omega_m * p.omega_m - K / p.M;
    if (wr2 <= 0) throw Error("model-core", "optical spring exceeds mechanical stiffness");
    return std::sqrt(wr2) - p.omega_m;
}

struct OperatingPoint {
    DerivedQuantities dq;
    PumpFieldSet pump;
    cd A_carrier{};
};

inline OperatingPoint make_operating_point(const ValidatedParams& vp) {
    const auto& p = vp.p;
    OperatingPoint op;
    op.dq = derive_closed_form(vp);
    auto& d = op.dq;
    if (p.auto_tune) {
        double delta = d.delta_os_formula;
        for (int it = 0; it < 60; ++it) {
            d.omega_p = p.omega_m + delta;
            op.pump = calibrate_pump(d);
            double next = optical_spring_exact(d, op.pump);
            bool done = std::abs(next - delta) < 1e-7 * std::max(1.0, std::abs(delta));
            delta = next;
            if (done) break;
        }
        d.delta_os = delta;
        d.omega_p = p.omega_m + delta;
        op.pump = calibrate_pump(d);
    } else {
        d.omega_p = p.omega_p;
        op.pump = calibrate_pump(d);
        d.delta_os = optical_spring_exact(d, op.pump);
    }
    op.A_carrier = carrier_amplitude(d);
    return op;
}

inline DerivedQuantities derive(const ValidatedParams& vp) { return make_operating_point(vp).dq; }

// Same parameters with a fixed pump offset omega_p = omega_m + offset.
inline OperatingPoint with_offset(const ValidatedParams& vp, double offset) {
    ValidatedParams v = vp;
    v.p.auto_tune = false;
    v.p.omega_p = vp.p.omega_m + offset;
    return make_operating_point(v);
}

inline OperatingPoint pump_off(const OperatingPoint& op) {
    OperatingPoint o = op;
    o.pump = PumpFieldSet{};
    return o;
}

}  // namespace qamp
