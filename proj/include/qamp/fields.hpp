#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "constants.hpp"
#include "derived.hpp"
#include "error.hpp"

namespace qamp {

// Pump fields around the membrane, |A|^2 in W.
struct PumpFieldSet {
    cd A_f1{}, A_f2{}, A_f3{}, A_f4{};
    cd mu{1.0, 0.0};

    std::array<cd, 4> array() const { return {A_f1, A_f2, A_f3, A_f4}; }
    bool is_off() const { return A_f1 == cd{} && A_f2 == cd{} && A_f3 == cd{} && A_f4 == cd{}; }
};

struct CarrierFieldSet {
    cd A_main{};       // main cavity field leaving the input mirror
    cd A_filter{};     // filter cavity field launched from the input toward the main cavity
    cd A_refl{};       // reflected at the filter input mirror
    double P_main = 0, P_filter = 0;
    double P_refl = 0, P_loss_main = 0, P_loss_filter = 0;
    double T_eff = 0;
};

namespace detail {

// Pump fields per unit input amplitude.
inline std::array<cd, 4> pump_unit(const DerivedQuantities& d, cd mu) {
    cd den_m = 1.0 + d.r_m * mu;
    if (std::abs(den_m) < 1e-9)
        throw Error("field-solver", "pump field singular; check omega_p detuning");
    cd rho = d.r_m + d.t_m * d.t_m * mu / den_m;
    cd den = 1.0 - d.r_f * rho;
    if (std::abs(den) < 1e-9)
        throw Error("field-solver", "pump field singular; check omega_p detuning");
    cd a1 = d.t_f / den;
    cd a3 = d.t_m / den_m * a1;
    return {a1, rho * a1, a3, mu * a3};
}

// Static (DC) optical network without pump. Unknowns:
// 0 a1, 1 a2, 2 af, 3 af4, 4 af3, 5 af2, 6 af1, 7 aout.
// If open_main is set, a2 is a unit source instead of the end-mirror return.
struct StaticSolution {
    Eigen::Matrix<cd, 8, 1> x;
    double residual = 0;
};

inline StaticSolution solve_static(const DerivedQuantities& d, cd a_in, bool open_main) {
    using Mat = Eigen::Matrix<cd, 8, 8>;
    using Vec = Eigen::Matrix<cd, 8, 1>;
    Mat A = Mat::Identity();
    Vec b = Vec::Zero();
    const cd chi = d.chi;
    A(0, 1) -= d.r_0;
    A(0, 4) -= d.t_0 * chi;
    A(2, 4) -= -d.r_0 * chi;
    A(2, 1) -= d.t_0;
    if (open_main)
        b(1) = 1.0;
    else
        A(1, 0) -= d.s_0;
    A(3, 2) -= chi * d.s_f;
    A(5, 6) -= d.r_m;
    A(5, 3) -= d.t_m;
    A(6, 5) -= d.r_f;
    b(6) += d.t_f * a_in;
    A(4, 6) -= d.t_m;
    A(4, 3) -= -d.r_m;
    A(7, 5) -= d.t_f;
    b(7) += -d.r_f * a_in;

    Eigen::PartialPivLU<Mat> lu(A);
    StaticSolution s;
    s.x = lu.solve(b);
    if (!s.x.allFinite()) throw Error("field-solver", "carrier solve failed");
    double bn = b.norm();
    s.residual = bn > 0 ? (A * s.x - b).norm() / bn : (A * s.x).norm();
    if (s.residual > 1e-10) throw Error("field-solver", "carrier solve failed");
    return s;
}

}  // namespace detail

inline PumpFieldSet solve_pump_fields(const DerivedQuantities& d, double P_in) {
    if (!(P_in >= 0.0)) throw Error("field-solver", "pump power must be nonnegative");
    PumpFieldSet f;
    f.mu = std::exp(-I * d.omega_p * d.tau_f);
    auto u = detail::pump_unit(d, f.mu);
    double a = std::sqrt(P_in);
    f.A_f1 = a * u[0];
    f.A_f2 = a * u[1];
    f.A_f3 = a * u[2];
    f.A_f4 = a * u[3];
    return f;
}

// Effective power transmissivity of the compound input mirror (main-cavity
// input mirror, filter cavity, membrane, filter input mirror) seen from inside
// the main cavity at DC. The filter loss is left out; it is its own noise
// channel.
inline double effective_transmissivity(const DerivedQuantities& d) {
    DerivedQuantities lossless = d;
    lossless.s_f = 1.0;
    auto s = detail::solve_static(lossless, 0.0, true);
    return std::norm(s.x(7));
}

inline CarrierFieldSet solve_carrier_fields(const DerivedQuantities& d, double P_carrier_in) {
    if (!(P_carrier_in >= 0.0)) throw Error("field-solver", "carrier power must be nonnegative");
    auto s = detail::solve_static(d, std::sqrt(P_carrier_in), false);
    CarrierFieldSet c;
    c.A_main = s.x(0);
    c.A_filter = s.x(4);
    c.A_refl = s.x(7);
    c.P_main = std::norm(s.x(0));
    c.P_filter = std::norm(s.x(4));
    c.P_refl = std::norm(s.x(7));
    c.P_loss_main = d.params.eps_0 * c.P_main;
    c.P_loss_filter = d.params.eps_f * std::norm(s.x(2));
    c.T_eff = effective_transmissivity(d);
    return c;
}

}  // namespace qamp
