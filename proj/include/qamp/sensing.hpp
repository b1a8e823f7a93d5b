#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "constants.hpp"
#include "derived.hpp"
#include "error.hpp"

namespace qamp {

inline double filter_fsr(const DerivedQuantities& d) { return c_light / (2.0 * d.params.L_f); }

// Columns: main cavity, filter cavity. Each DOF is a cavity detuning in Hz
// (equivalently a fractional length change), so a common laser-frequency
// shift moves both by the same amount.
struct SensingMatrix {
    std::vector<double> f_mod_hz;
    Eigen::MatrixX2d gain;         // demodulated, row-normalised
    Eigen::MatrixX2d quadrature;   // residue left in the rejected quadrature
    Eigen::MatrixX2cd raw;         // complex error-signal slopes, per Hz
    std::vector<double> demod_phase;
};

namespace detail {

// Reflection from the filter input mirror for a field at omega_0 + Omega with
// round-trip phase offsets dm (main) and df (filter), pump off.
inline cd pdh_reflection(const DerivedQuantities& d, double Omega, double dm, double df) {
    cd D2 = std::exp(-I * (Omega * d.tau + dm));
    cd Df = std::exp(-I * (Omega * d.tau_f + df) / 2.0);
    cd rho = -d.r_0 + d.t_0 * d.t_0 * d.s_0 * D2 / (1.0 - d.r_0 * d.s_0 * D2);
    cd R = d.chi * Df * d.s_f * rho * d.chi * Df;  // a_f3 -> a_f4
    double den = 1.0 - d.r_f * d.r_m;
    double rF = d.t_m * d.r_f * d.t_m / den - d.r_m;        // a_f4 -> a_f3
    double tF = d.t_m * (d.r_f * d.r_m * d.t_f / den + d.t_f);  // a_in -> a_f3
    cd af3 = tF / (1.0 - rF * R);
    cd af4 = R * af3;
    cd af2 = (d.t_m * af4 + d.r_m * d.t_f) / den;
    return -d.r_f + d.t_f * af2;
}

inline cd pdh_error(const DerivedQuantities& d, double f_mod, double dm, double df) {
    double W = two_pi * f_mod;
    cd rc = pdh_reflection(d, 0.0, dm, df);
    cd rp = pdh_reflection(d, W, dm, df);
    cd rn = pdh_reflection(d, -W, dm, df);
    return std::conj(rc) * rp - rc * std::conj(rn);
}

}  // namespace detail

inline SensingMatrix sensing_matrix(const DerivedQuantities& d, const std::vector<double>& f_mods) {
    const int n = static_cast<int>(f_mods.size());
    SensingMatrix s;
    s.f_mod_hz = f_mods;
    s.gain.resize(n, 2);
    s.quadrature.resize(n, 2);
    s.raw.resize(n, 2);
    s.demod_phase.assign(n, 0.0);
    const double h = 1e-8;  // rad of round-trip phase
    const double lever[2] = {two_pi * d.tau, two_pi * d.tau_f};  // rad per Hz
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 2; ++j) {
            double dm = j == 0 ? h : 0.0, df = j == 1 ? h : 0.0;
            cd slope = (detail::pdh_error(d, f_mods[i], dm, df) - detail::pdh_error(d, f_mods[i], -dm, -df)) / (2 * h);
            s.raw(i, j) = slope * lever[j];
        }
        // start from the usual PDH quadrature, then rotate by the smallest
        // angle that puts the dominant DOF fully in phase
        Eigen::Vector2cd q = -I * s.raw.row(i).transpose();
        int k = std::abs(q(0)) >= std::abs(q(1)) ? 0 : 1;
        double phi = -std::arg(q(k));
        if (phi > pi / 2) phi -= pi;
        if (phi < -pi / 2) phi += pi;
        q *= std::polar(1.0, phi);
        s.demod_phase[i] = phi;
        double m = std::max(std::abs(q(0).real()), std::abs(q(1).real()));
        if (!(m > 0)) throw Error("sensing-control", "DOFs not separable at chosen frequencies");
        for (int j = 0; j < 2; ++j) {
            s.gain(i, j) = q(j).real() / m;
            s.quadrature(i, j) = q(j).imag() / m;
        }
    }
    // overall sign of an error signal is a convention: first row's dominant entry positive
    if (n > 0) {
        int k = std::abs(s.gain(0, 0)) >= std::abs(s.gain(0, 1)) ? 0 : 1;
        if (s.gain(0, k) < 0) {
            s.gain *= -1.0;
            s.quadrature *= -1.0;
        }
    }
    if (n >= 2) {
        double det = s.gain(0, 0) * s.gain(1, 1) - s.gain(0, 1) * s.gain(1, 0);
        if (std::abs(det) < 1e-6) throw Error("sensing-control", "DOFs not separable at chosen frequencies");
    }
    return s;
}

}  // namespace qamp
