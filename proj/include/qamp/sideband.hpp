#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "constants.hpp"
#include "derived.hpp"
#include "error.hpp"
#include "fields.hpp"

namespace qamp {

// Optical unknowns of one sideband, in matrix order.
enum Port : int { a_1 = 0, a_2, a_f, a_f4, a_f3, a_f2, a_f1, a_out, n_ports };

inline const char* port_name(int p) {
    static const char* names[] = {"a_1", "a_2", "a_f", "a_f4", "a_f3", "a_f2", "a_f1", "a_out"};
    return names[p];
}

inline constexpr int n_unknowns = 2 * n_ports + 1;
inline constexpr int y_index = 2 * n_ports;

// Sideband 0 is the signal at omega_0 + Omega, sideband 1 the conjugated idler
// at omega_0 + 2 omega_p - Omega.
inline constexpr int idx(int port, int sb) { return port + n_ports * sb; }

// Drive columns.
enum Drive : int { d_x = 0, d_in_s, d_in_i, d_loss0_s, d_loss0_i, d_lossf_s, d_lossf_i, d_force, n_drives };

struct DriveVector {
    cd x_end{};
    std::array<cd, 2> a_vac_in{};
    std::array<cd, 2> a_vac_loss_main{};
    std::array<cd, 2> a_vac_loss_filter{};
    cd F_th{};

    Eigen::Matrix<cd, n_drives, 1> as_vector() const {
        Eigen::Matrix<cd, n_drives, 1> v;
        v << x_end, a_vac_in[0], a_vac_in[1], a_vac_loss_main[0], a_vac_loss_main[1],
            a_vac_loss_filter[0], a_vac_loss_filter[1], F_th;
        return v;
    }
    static DriveVector unit(Drive k) {
        DriveVector d;
        switch (k) {
            case d_x: d.x_end = 1; break;
            case d_in_s: d.a_vac_in[0] = 1; break;
            case d_in_i: d.a_vac_in[1] = 1; break;
            case d_loss0_s: d.a_vac_loss_main[0] = 1; break;
            case d_loss0_i: d.a_vac_loss_main[1] = 1; break;
            case d_lossf_s: d.a_vac_loss_filter[0] = 1; break;
            case d_lossf_i: d.a_vac_loss_filter[1] = 1; break;
            case d_force: d.F_th = 1; break;
            default: break;
        }
        return d;
    }
};

using SysMatrix = Eigen::Matrix<cd, n_unknowns, n_unknowns>;
using SysVector = Eigen::Matrix<cd, n_unknowns, 1>;
using DriveMatrix = Eigen::Matrix<cd, n_unknowns, n_drives>;

struct SidebandState {
    std::array<std::array<cd, 2>, n_ports> port{};  // [port][sideband]
    std::array<cd, 2> a_in{};
    cd y{};
    double residual = 0;

    cd signal(Port p) const { return port[p][0]; }
    cd idler(Port p) const { return port[p][1]; }
};

struct LinearSystem {
    double Omega = 0;
    SysMatrix A;
    DriveMatrix B;

    // Ruiz row/column equilibration; y is in metres and would otherwise
    // dominate the conditioning
    struct Scaling {
        Eigen::Matrix<double, n_unknowns, 1> row, col;
    };
    Scaling scaling() const {
        Scaling s;
        s.row.setOnes();
        s.col.setOnes();
        for (int it = 0; it < 10; ++it) {
            for (int i = 0; i < n_unknowns; ++i) {
                double m = 0;
                for (int j = 0; j < n_unknowns; ++j) m = std::max(m, std::abs(A(i, j)) * s.row(i) * s.col(j));
                if (m > 0) s.row(i) /= std::sqrt(m);
            }
            for (int j = 0; j < n_unknowns; ++j) {
                double m = 0;
                for (int i = 0; i < n_unknowns; ++i) m = std::max(m, std::abs(A(i, j)) * s.row(i) * s.col(j));
                if (m > 0) s.col(j) /= std::sqrt(m);
            }
        }
        return s;
    }
    SysMatrix scaled(const Scaling& s) const { return s.row.asDiagonal() * A * s.col.asDiagonal(); }

    // of the equilibrated matrix that is actually factorised
    double condition_number() const {
        const Eigen::MatrixXcd a = scaled(scaling());
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
        const auto& s = svd.singularValues();
        return s(0) / s(s.size() - 1);
    }
};

// Options for switching off parts of the network; used for loop cuts and
// for decoupled-cavity quantities.
struct AssemblyOptions {
    bool cut_f_to_f4 = false;     // remove a_f -> a_f4 (amplifier input)
    bool cut_f3_to_itm = false;   // remove a_f3 -> main input mirror
    bool seal_main = false;       // r_0 = 1, t_0 = 0
};

inline LinearSystem assemble(const DerivedQuantities& d, const PumpFieldSet& pump, double Omega,
                             cd A_carrier = 1.0, const AssemblyOptions& opt = {}) {
    const auto& p = d.params;
    LinearSystem sys;
    sys.Omega = Omega;
    sys.A.setIdentity();
    sys.B.setZero();
    auto& A = sys.A;
    auto& B = sys.B;

    const double r0 = opt.seal_main ? 1.0 : d.r_0;
    const double t0 = opt.seal_main ? 0.0 : d.t_0;
    const double w = Omega - d.omega_p;
    const double kp = (d.omega_0 + d.omega_p) / c_light;
    const double k0 = d.omega_0 / c_light;
    const std::array<cd, 4> Ap = pump.array();
    const double sq0 = std::sqrt(p.eps_0), sqf = std::sqrt(p.eps_f);

    for (int sb = 0; sb < 2; ++sb) {
        // delays a(t - T) -> exp(-i f T) with f the sideband frequency; the
        // idler row is conjugated
        double f = sb == 0 ? Omega : 2.0 * d.omega_p - Omega;
        cd D = std::exp(-I * f * d.tau / 2.0);
        cd Df = std::exp(-I * f * d.tau_f / 2.0);
        cd chi = d.chi;
        auto cj = [sb](cd z) { return sb == 0 ? z : std::conj(z); };
        D = cj(D);
        Df = cj(Df);
        chi = cj(chi);
        auto r = [sb](int port) { return idx(port, sb); };

        A(r(a_1), r(a_2)) -= r0 * D;
        if (!opt.cut_f3_to_itm) A(r(a_1), r(a_f3)) -= t0 * chi * Df;

        if (!opt.cut_f3_to_itm) A(r(a_f), r(a_f3)) -= -r0 * chi * Df;
        A(r(a_f), r(a_2)) -= t0 * D;

        A(r(a_2), r(a_1)) -= d.s_0 * D;
        B(r(a_2), sb == 0 ? d_loss0_s : d_loss0_i) = sq0;
        if (sb == 0) B(r(a_2), d_x) = -2.0 * I * A_carrier * k0;

        if (!opt.cut_f_to_f4) A(r(a_f4), r(a_f)) -= chi * d.s_f * Df;
        B(r(a_f4), sb == 0 ? d_lossf_s : d_lossf_i) = sqf;

        A(r(a_f2), r(a_f1)) -= d.r_m;
        A(r(a_f2), r(a_f4)) -= d.t_m;
        A(r(a_f2), y_index) -= cj(-2.0 * I * d.r_m * kp * Ap[0]);

        A(r(a_f1), r(a_f2)) -= d.r_f;
        B(r(a_f1), sb == 0 ? d_in_s : d_in_i) = d.t_f;

        // the pump reaching the membrane from the far side is -A_f4 in the
        // membrane's reflection convention
        A(r(a_f3), r(a_f1)) -= d.t_m;
        A(r(a_f3), r(a_f4)) -= -d.r_m;
        A(r(a_f3), y_index) -= cj(-2.0 * I * d.r_m * kp * Ap[3]);

        A(r(a_out), r(a_f2)) -= d.t_f;
        B(r(a_out), sb == 0 ? d_in_s : d_in_i) = -d.r_f;
    }

    // M (omega_m^2 - w^2 + i gamma w) y - F_rad = F_th
    A(y_index, y_index) = p.M * (p.omega_m * p.omega_m - w * w + I * d.gamma_mech * w);
    const int fports[4] = {a_f1, a_f2, a_f3, a_f4};
    const double sgn[4] = {1, 1, -1, -1};
    for (int k = 0; k < 4; ++k) {
        A(y_index, idx(fports[k], 0)) -= sgn[k] * std::conj(Ap[k]) / c_light;
        A(y_index, idx(fports[k], 1)) -= sgn[k] * Ap[k] / c_light;
    }
    B(y_index, d_force) = 1.0;
    return sys;
}

namespace detail {

inline SidebandState unpack(const SysVector& x, const DriveVector& drive, double residual) {
    SidebandState s;
    for (int port = 0; port < n_ports; ++port)
        for (int sb = 0; sb < 2; ++sb) s.port[port][sb] = x(idx(port, sb));
    s.a_in = drive.a_vac_in;
    s.y = x(y_index);
    s.residual = residual;
    return s;
}

inline void check_solution(const LinearSystem& sys, const SysVector& x, const SysVector& b, double& res) {
    if (!x.allFinite())
        throw Error("sideband-dynamics",
                    "system resonant/unstable at this frequency (Omega = " + std::to_string(sys.Omega) + " rad/s)");
    double bn = b.norm();
    res = bn > 0 ? (sys.A * x - b).norm() / bn : x.norm();
    if (res > 1e-10)
        throw Error("sideband-dynamics",
                    "system resonant/unstable at this frequency (Omega = " + std::to_string(sys.Omega) + " rad/s)");
}

}  // namespace detail

inline SidebandState solve(const LinearSystem& sys, const DriveVector& drive) {
    SysVector b = sys.B * drive.as_vector();
    auto sc = sys.scaling();
    Eigen::PartialPivLU<SysMatrix> lu(sys.scaled(sc));
    SysVector x = sc.col.asDiagonal() * lu.solve(sc.row.asDiagonal() * b);
    double res = 0;
    detail::check_solution(sys, x, b, res);
    return detail::unpack(x, drive, res);
}

// Transfer functions from every drive column to every unknown.
struct Transfer {
    Eigen::Matrix<cd, n_unknowns, n_drives> T;
    double residual = 0;

    cd operator()(Port p, int sb, Drive k) const { return T(idx(p, sb), k); }
};

inline Transfer solve_all(const LinearSystem& sys) {
    auto sc = sys.scaling();
    Eigen::PartialPivLU<SysMatrix> lu(sys.scaled(sc));
    Transfer t;
    t.T = sc.col.asDiagonal() * lu.solve(sc.row.asDiagonal() * sys.B);
    if (!t.T.allFinite())
        throw Error("sideband-dynamics",
                    "system resonant/unstable at this frequency (Omega = " + std::to_string(sys.Omega) + " rad/s)");
    t.residual = (sys.A * t.T - sys.B).norm() / sys.B.norm();
    if (t.residual > 1e-10)
        throw Error("sideband-dynamics",
                    "system resonant/unstable at this frequency (Omega = " + std::to_string(sys.Omega) + " rad/s)");
    return t;
}

// Membrane sub-system (filter input mirror, membrane, pump, y) in isolation.
// Inputs: a_f4 signal/idler, a_in signal/idler. Outputs: a_f3 signal/idler,
// a_out signal/idler. Frequency argument is w = Omega - omega_p.
struct SubsystemResponse {
    Eigen::Matrix<cd, 4, 4> S;  // rows (f3_s, f3_i, out_s, out_i), cols (f4_s, f4_i, in_s, in_i)
    Eigen::Matrix2cd G() const { return S.block<2, 2>(0, 0); }
};

inline SubsystemResponse subsystem_response(const DerivedQuantities& d, const PumpFieldSet& pump, double w) {
    const auto& p = d.params;
    using Mat = Eigen::Matrix<cd, 7, 7>;
    Mat A = Mat::Identity();
    Eigen::Matrix<cd, 7, 4> B = Eigen::Matrix<cd, 7, 4>::Zero();
    const double kp = (d.omega_0 + d.omega_p) / c_light;
    const std::array<cd, 4> Ap = pump.array();
    // per sideband: 0 af1, 1 af2, 2 af3; y = 6
    for (int sb = 0; sb < 2; ++sb) {
        auto cj = [sb](cd z) { return sb == 0 ? z : std::conj(z); };
        int o = 3 * sb;
        A(o + 1, o + 0) -= d.r_m;
        A(o + 1, 6) -= cj(-2.0 * I * d.r_m * kp * Ap[0]);
        B(o + 1, sb) += d.t_m;
        A(o + 0, o + 1) -= d.r_f;
        B(o + 0, 2 + sb) += d.t_f;
        A(o + 2, o + 0) -= d.t_m;
        A(o + 2, 6) -= cj(-2.0 * I * d.r_m * kp * Ap[3]);
        B(o + 2, sb) += -d.r_m;
    }
    A(6, 6) = p.M * (p.omega_m * p.omega_m - w * w + I * d.gamma_mech * w);
    const double sgn[3] = {1, 1, -1};
    for (int k = 0; k < 3; ++k) {
        A(6, k) -= sgn[k] * std::conj(Ap[k]) / c_light;
        A(6, 3 + k) -= sgn[k] * Ap[k] / c_light;
    }
    B(6, 0) += -std::conj(Ap[3]) / c_light;
    B(6, 1) += -Ap[3] / c_light;

    Eigen::PartialPivLU<Mat> lu(A);
    Eigen::Matrix<cd, 7, 4> X = lu.solve(B);
    if (!X.allFinite()) throw Error("sideband-dynamics", "system resonant/unstable at this frequency");
    SubsystemResponse r;
    for (int j = 0; j < 4; ++j) {
        r.S(0, j) = X(2, j);
        r.S(1, j) = X(5, j);
        // a_out = -r_f a_in + t_f a_f2
        r.S(2, j) = d.t_f * X(1, j) + (j == 2 ? -d.r_f : 0.0);
        r.S(3, j) = d.t_f * X(4, j) + (j == 3 ? -d.r_f : 0.0);
    }
    return r;
}

// Exact amplifier gain a_f3 / a_f4 (signal to signal).
inline cd gain_exact(const DerivedQuantities& d, const PumpFieldSet& pump, double w) {
    return subsystem_response(d, pump, w).S(0, 0);
}

// Single-mode approximation of the gain.
inline cd gain_approx(const DerivedQuantities& d, double w) {
    const auto& p = d.params;
    return 1.0 + 2.0 * I * d.g * d.g * p.omega_m * d.tau_f /
                     (w * w - I * d.gamma_mech * w - p.omega_m * p.omega_m);
}

struct NoiseCoupling {
    double K = 0;
    bool attenuator = false;
};

inline NoiseCoupling noise_coupling(cd G) {
    double g2 = std::norm(G);
    if (g2 < 1.0) return {0.0, true};
    return {std::sqrt(g2 - 1.0), false};
}

// Static carrier amplitude that converts end-mirror motion into sidebands.
inline cd carrier_amplitude(const DerivedQuantities& d) {
    return solve_carrier_fields(d, d.params.P_carrier_in).A_main;
}

// a_out / x_end on a grid of signal frequencies (rad/s).
inline std::vector<cd> signal_response(const DerivedQuantities& d, const PumpFieldSet& pump,
                                       const std::vector<double>& Omega, bool normalize = false) {
    cd Ac = carrier_amplitude(d);
    auto tf = [&](double W) {
        auto sys = assemble(d, pump, W, Ac);
        try {
            return solve(sys, DriveVector::unit(d_x)).signal(a_out);
        } catch (const Error& e) {
            throw Error("sideband-dynamics", std::string(e.what()) + " in signal_response");
        }
    };
    std::vector<cd> out;
    out.reserve(Omega.size());
    for (double W : Omega) out.push_back(tf(W));
    if (normalize) {
        cd dc = tf(0.0);
        for (auto& v : out) v /= std::abs(dc);
    }
    return out;
}

}  // namespace qamp
