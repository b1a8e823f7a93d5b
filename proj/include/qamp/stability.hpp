#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sideband.hpp"

namespace qamp {

// Field returned to a_f4 per unit a_f3 leaving the membrane: filter arm, main
// cavity reflection, filter arm again. sb = 0 signal, 1 idler.
inline cd return_path(const DerivedQuantities& d, double Omega, int sb) {
    double f = sb == 0 ? Omega : 2.0 * d.omega_p - Omega;
    cd D = std::exp(-I * f * d.tau / 2.0);
    cd Df = std::exp(-I * f * d.tau_f / 2.0);
    cd chi = d.chi;
    if (sb == 1) {
        D = std::conj(D);
        Df = std::conj(Df);
        chi = std::conj(chi);
    }
    cd a2 = d.s_0 * D * d.t_0 * chi * Df / (1.0 - d.r_0 * d.s_0 * D * D);
    cd af = -d.r_0 * chi * Df + d.t_0 * D * a2;
    return chi * d.s_f * Df * af;
}

// M_OL with the loop cut at the membrane (a_f4 -> a_f3). The sign is chosen so
// the closed-loop characteristic function is det(I + M_OL).
inline Eigen::Matrix2cd open_loop_matrix(const DerivedQuantities& d, const PumpFieldSet& pump, double w) {
    double Omega = w + d.omega_p;
    Eigen::Matrix2cd R = Eigen::Matrix2cd::Zero();
    R(0, 0) = return_path(d, Omega, 0);
    R(1, 1) = return_path(d, Omega, 1);
    return -R * subsystem_response(d, pump, w).G();
}

inline cd characteristic(const DerivedQuantities& d, const PumpFieldSet& pump, double w) {
    return (Eigen::Matrix2cd::Identity() + open_loop_matrix(d, pump, w)).determinant();
}

enum class LoopCut { amplifier_input, main_input_mirror };

// Independent route: det(A_full) / det(A_cut) from the dense 17x17 system.
inline cd characteristic_full(const OperatingPoint& op, double w, LoopCut cut) {
    double Omega = w + op.dq.omega_p;
    AssemblyOptions opt;
    if (cut == LoopCut::amplifier_input)
        opt.cut_f_to_f4 = true;
    else
        opt.cut_f3_to_itm = true;
    auto full = assemble(op.dq, op.pump, Omega, op.A_carrier);
    auto part = assemble(op.dq, op.pump, Omega, op.A_carrier, opt);
    return full.A.partialPivLu().determinant() / part.A.partialPivLu().determinant();
}

struct NyquistContour {
    std::vector<double> omega;  // w = Omega - omega_p, rad/s
    std::vector<cd> value;
    bool closed = false;
    double closure_phase = 0;   // phase picked up between the last and first sample

    void close_short() {
        closed = true;
        closure_phase = value.empty() ? 0.0 : std::arg(value.front() / value.back());
    }
};

struct NyquistOptions {
    double f_min_hz = 10.0;
    double f_max_hz = 10e6;
    int points = 4000;
    int dense_points = 20000;      // linear seed grid over omega_m +- 5 gamma_f
    double max_phase_step = pi / 8;
    std::size_t max_samples = 4000000;
};

namespace detail {

inline std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, n == 1 ? 0.0 : double(i) / (n - 1));
    return v;
}

// Location of the narrow membrane resonance of the sub-system, w > 0.
inline double subsystem_resonance(const DerivedQuantities& d, const PumpFieldSet& pump) {
    const double wm = d.params.omega_m;
    double best = wm, bestv = -1;
    for (int i = -2000; i <= 2000; ++i) {
        double w = wm + 0.25 * i;
        double v = std::abs(subsystem_response(d, pump, w).S(0, 0));
        if (v > bestv) bestv = v, best = w;
    }
    return best;
}

}  // namespace detail

inline std::vector<double> nyquist_grid(const DerivedQuantities& d, const PumpFieldSet& pump,
                                        const NyquistOptions& o = {}) {
    const auto& p = d.params;
    std::vector<double> pos = detail::logspace(two_pi * o.f_min_hz, two_pi * o.f_max_hz, o.points);
    double lo = std::max(p.omega_m - 5 * p.gamma_f, two_pi * o.f_min_hz);
    double hi = p.omega_m + 5 * p.gamma_f;
    for (int i = 0; i < o.dense_points; ++i) pos.push_back(lo + (hi - lo) * i / (o.dense_points - 1));
    pos.push_back(d.omega_p);
    pos.push_back(p.omega_m);
    if (!pump.is_off()) {
        double ws = detail::subsystem_resonance(d, pump);
        for (double x : detail::logspace(1e-5, 1e3, 200)) {
            pos.push_back(ws + x);
            pos.push_back(ws - x);
        }
    }
    pos.erase(std::remove_if(pos.begin(), pos.end(), [](double x) { return !(x > 0); }), pos.end());
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    std::vector<double> g;
    g.reserve(2 * pos.size() + 1);
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
    g.push_back(0.0);
    for (double x : pos) g.push_back(x);
    return g;
}

inline NyquistContour nyquist(const DerivedQuantities& d, const PumpFieldSet& pump,
                              const std::vector<double>& grid, const NyquistOptions& o = {}) {
    std::vector<cd> vals(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { vals[i] = characteristic(d, pump, grid[i]); });
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!std::isfinite(vals[i].real()) || !std::isfinite(vals[i].imag()))
            throw Error("stability-analyzer",
                        "non-finite contour sample at w = " + std::to_string(grid[i]) + " rad/s");

    // adaptive bisection until adjacent phase steps are below the limit
    NyquistContour c;
    c.omega.reserve(grid.size() * 2);
    c.value.reserve(grid.size() * 2);
    struct Seg {
        double w0, w1;
        cd v0, v1;
    };
    std::vector<Seg> stack;
    c.omega.push_back(grid[0]);
    c.value.push_back(vals[0]);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        stack.push_back({grid[i], grid[i + 1], vals[i], vals[i + 1]});
        while (!stack.empty()) {
            Seg s = stack.back();
            stack.pop_back();
            double step = std::abs(std::arg(s.v1 / s.v0));
            if (step > o.max_phase_step && s.w1 - s.w0 > 1e-12 * std::max(1.0, std::abs(s.w0)) &&
                c.omega.size() < o.max_samples) {
                double wm = 0.5 * (s.w0 + s.w1);
                cd vm = characteristic(d, pump, wm);
                if (!std::isfinite(vm.real()) || !std::isfinite(vm.imag()))
                    throw Error("stability-analyzer",
                                "non-finite contour sample at w = " + std::to_string(wm) + " rad/s");
                stack.push_back({wm, s.w1, vm, s.v1});
                stack.push_back({s.w0, wm, s.v0, vm});
            } else {
                c.omega.push_back(s.w1);
                c.value.push_back(s.v1);
            }
        }
    }
    // The ends sit at |w| ~ 2 pi 10 MHz where the loop gain has rolled into
    // the delay-dominated regime; the closing arc through the unstable half
    // plane returns the principal argument of the end values to that of the
    // start.
    c.closed = true;
    c.closure_phase = std::arg(c.value.front()) - std::arg(c.value.back());
    return c;
}

inline NyquistContour nyquist(const DerivedQuantities& d, const PumpFieldSet& pump, const NyquistOptions& o = {}) {
    return nyquist(d, pump, nyquist_grid(d, pump, o), o);
}

inline int winding_number(const NyquistContour& c) {
    if (!c.closed) throw Error("stability-analyzer", "contour not closed");
    if (c.value.size() < 2) throw Error("stability-analyzer", "insufficient contour resolution");
    double total = c.closure_phase;
    for (std::size_t i = 0; i + 1 < c.value.size(); ++i) total += std::arg(c.value[i + 1] / c.value[i]);
    double n = total / two_pi;
    double r = std::round(n);
    if (std::abs(n - r) >= 0.05) throw Error("stability-analyzer", "insufficient contour resolution");
    return static_cast<int>(r);
}

struct StabilityReport {
    int winding = 0;
    bool stable = true;
    double g_ratio = 0;           // operating g / omega_c
    double critical_ratio = 0;    // g / omega_c at the onset of instability
    double gain_margin = 0;       // critical g / operating g
    int evaluations = 0;
};

inline int winding_at(const OperatingPoint& op, const NyquistOptions& o = {}) {
    return winding_number(nyquist(op.dq, op.pump, o));
}

struct MarginOptions {
    double lo = 0.5;
    double hi = 1.5;
    double tol = 1e-3;
    NyquistOptions nyquist;
};

// Bisects g / omega_c (pump offset re-tuned at every step when auto-tune is on)
// to the first change of the winding number.
inline StabilityReport stability_margin(const ValidatedParams& vp, const MarginOptions& mo = {}) {
    StabilityReport rep;
    auto at = [&](double ratio) {
        ValidatedParams v = vp;
        v.p.coupling_mode = CouplingMode::ratio;
        v.p.g_ratio = ratio;
        ++rep.evaluations;
        return winding_at(make_operating_point(v), mo.nyquist);
    };
    auto op = make_operating_point(vp);
    rep.winding = winding_at(op, mo.nyquist);
    rep.stable = rep.winding == 0;
    rep.g_ratio = op.dq.g / op.dq.omega_c;

    double lo = mo.lo, hi = mo.hi;
    if (at(lo) != 0 || at(hi) == 0) throw Error("stability-analyzer", "no instability found in scan range");
    while (hi - lo > mo.tol) {
        double mid = 0.5 * (lo + hi);
        if (at(mid) == 0)
            lo = mid;
        else
            hi = mid;
    }
    rep.critical_ratio = 0.5 * (lo + hi);
    rep.gain_margin = rep.g_ratio > 0 ? rep.critical_ratio / rep.g_ratio : INFINITY;
    return rep;
}

}  // namespace qamp
