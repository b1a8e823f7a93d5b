// qamp: command-line front end.
//
//   qamp [--config FILE] [--set key=value ...] <subcommand> [options]
//
// Exit status: 0 ok, 1 domain error, 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qamp/config.hpp"
#include "qamp/qamp.hpp"

using nlohmann::json;
using namespace qamp;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::string format = "csv";
    double f_min = 100.0;
    double f_max = 20e3;
    int points = 400;
    bool linear = false;
};

struct Run {
    ExperimentParams params;
    ValidatedParams vp;
    std::string hash;
    std::string command;
};

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json provenance(const Run& r) {
    return {{"tool", "qamp"}, {"version", QAMP_VERSION}, {"command", r.command}, {"config_hash", r.hash}};
}

std::string csv_header(const Run& r) {
    return "# qamp " QAMP_VERSION " command=" + r.command + " config_hash=" + r.hash + "\n";
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw UsageError("cannot write output: " + c.out);
    f << text;
}

void emit_json(const Common& c, const Run& r, json j) {
    j["provenance"] = provenance(r);
    emit(c, j.dump(2) + "\n");
}

std::vector<double> freq_grid(const Common& c) {
    if (!(c.f_min > 0) || !(c.f_max > c.f_min)) throw UsageError("need 0 < f_min < f_max");
    if (c.points < 2) throw UsageError("need at least 2 points");
    std::vector<double> f(c.points);
    for (int i = 0; i < c.points; ++i) {
        double t = double(i) / (c.points - 1);
        f[i] = c.linear ? c.f_min + t * (c.f_max - c.f_min) : c.f_min * std::pow(c.f_max / c.f_min, t);
    }
    return f;
}

OperatingPoint operating_point(const Run& r, const std::optional<double>& offset_hz) {
    return offset_hz ? with_offset(r.vp, two_pi * *offset_hz) : make_operating_point(r.vp);
}

json derived_json(const DerivedQuantities& d) {
    return {
        {"tau_s", d.tau},
        {"tau_f_s", d.tau_f},
        {"r_0", d.r_0}, {"t_0", d.t_0}, {"r_f", d.r_f}, {"t_f", d.t_f}, {"r_m", d.r_m}, {"t_m", d.t_m},
        {"gamma_0_hz", d.gamma_0 / two_pi},
        {"omega_0_hz", d.omega_0 / two_pi},
        {"omega_c_hz", d.omega_c / two_pi},
        {"g_hz", d.g / two_pi},
        {"g_over_omega_c", d.omega_c > 0 ? d.g / d.omega_c : 0.0},
        {"delta_os_hz", d.delta_os / two_pi},
        {"delta_os_formula_hz", d.delta_os_formula / two_pi},
        {"omega_p_hz", d.omega_p / two_pi},
        {"fsr_f_hz", d.fsr_f},
        {"gamma_mech_hz", d.gamma_mech / two_pi},
        {"gamma_f_from_T_f_hz", d.gamma_f_from_Tf / two_pi},
        {"P_f_model_W", d.P_f_model},
        {"P_in_model_W", d.P_in_model},
        {"P_f_formula_W", d.P_f_formula},
    };
}

json complex_json(cd z) { return json::array({z.real(), z.imag()}); }

// --- subcommands ---------------------------------------------------------

void cmd_derive(const Common& c, const Run& r) {
    auto op = make_operating_point(r.vp);
    const auto& d = op.dq;
    json j;
    j["params"] = params_to_json(r.params);
    j["derived"] = derived_json(d);
    j["warnings"] = r.vp.warnings;
    // consistency diagnostics, reported as ratios only
    double g_pf = d.g_from_Pf;
    double target = r.params.g_ratio * d.omega_c;
    j["diagnostics"] = {
        {"g_from_P_f_hz", g_pf / two_pi},
        {"g_from_P_f_over_target", target > 0 ? g_pf / target : 0.0},
        {"eps0_eq_at_1e-8", d.g > 0 ? equivalent_loss(d, 1e-8) : 0.0},
        {"eps0_eq_over_70ppm", d.g > 0 ? equivalent_loss(d, 1e-8) / 70e-6 : 0.0},
    };
    emit_json(c, r, j);
}

void cmd_fields(const Common& c, const Run& r) {
    auto op = make_operating_point(r.vp);
    const auto& d = op.dq;
    auto table = solve_pump_fields(d, r.params.P_in);
    auto car = solve_carrier_fields(d, r.params.P_carrier_in);
    auto pump_json = [](const PumpFieldSet& p) {
        return json{{"A_f1", complex_json(p.A_f1)}, {"A_f2", complex_json(p.A_f2)},
                    {"A_f3", complex_json(p.A_f3)}, {"A_f4", complex_json(p.A_f4)},
                    {"mu", complex_json(p.mu)},     {"P_f1_W", std::norm(p.A_f1)}};
    };
    json j;
    j["pump_at_P_in"] = pump_json(table);
    j["pump_model"] = pump_json(op.pump);
    j["carrier"] = {{"A_main", complex_json(car.A_main)}, {"P_main_W", car.P_main},
                    {"P_filter_W", car.P_filter},        {"P_refl_W", car.P_refl},
                    {"P_loss_main_W", car.P_loss_main},  {"P_loss_filter_W", car.P_loss_filter},
                    {"T_eff", car.T_eff}};
    emit_json(c, r, j);
}

void cmd_response(const Common& c, const Run& r, std::optional<double> offset_hz, bool raw) {
    auto op = operating_point(r, offset_hz);
    auto f = freq_grid(c);
    std::vector<double> W(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) W[i] = two_pi * f[i];
    auto tf = signal_response(op.dq, op.pump, W, !raw);
    double peak = 0, fpk = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(tf[i]) > peak) peak = std::abs(tf[i]), fpk = f[i];
    if (c.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < f.size(); ++i) rows.push_back({f[i], std::abs(tf[i]), tf[i].real(), tf[i].imag()});
        emit_json(c, r, {{"columns", {"f_Hz", "abs", "re", "im"}}, {"rows", rows},
                         {"offset_hz", (op.dq.omega_p - r.params.omega_m) / two_pi},
                         {"peak", peak}, {"peak_f_Hz", fpk}});
        return;
    }
    std::string s = csv_header(r) + "f_Hz,abs,re,im\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        s += fmt_num(f[i]) + "," + fmt_num(std::abs(tf[i])) + "," + fmt_num(tf[i].real()) + "," +
             fmt_num(tf[i].imag()) + "\n";
    emit(c, s);
}

void cmd_nyquist(const Common& c, const Run& r, std::optional<double> offset_hz, bool margin) {
    auto op = operating_point(r, offset_hz);
    auto contour = nyquist(op.dq, op.pump);
    int wn = winding_number(contour);
    if (c.format == "json") {
        json j{{"winding", wn}, {"stable", wn == 0}, {"samples", contour.value.size()},
               {"offset_hz", (op.dq.omega_p - r.params.omega_m) / two_pi}};
        if (margin) {
            auto rep = stability_margin(r.vp);
            j["critical_g_over_omega_c"] = rep.critical_ratio;
            j["gain_margin"] = rep.gain_margin;
        }
        emit_json(c, r, j);
        return;
    }
    std::string s = csv_header(r);
    s += "# winding=" + std::to_string(wn) + " stable=" + (wn == 0 ? "true" : "false") + "\n";
    s += "Re,Im\n";
    for (auto v : contour.value) s += fmt_num(v.real()) + "," + fmt_num(v.imag()) + "\n";
    emit(c, s);
}

void cmd_noise(const Common& c, const Run& r, const std::string& tq_arg, std::optional<double> offset_hz,
               const std::string& summary_path) {
    double tq = 0;
    bool auto_tq = tq_arg == "auto";
    if (auto_tq) {
        tq = t_over_q_auto(r.params);
    } else {
        try {
            std::size_t pos = 0;
            tq = std::stod(tq_arg, &pos);
            if (pos != tq_arg.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw UsageError("--t-over-q needs a number or 'auto'");
        }
    }
    auto op = operating_point(r, offset_hz);
    auto b = total_budget(op, freq_grid(c), tq);
    auto pk = b.peak_improvement();
    json summary{{"peak_improvement", pk.factor}, {"peak_f_Hz", pk.f_hz}, {"t_over_q_K", tq},
                 {"t_over_q_auto", auto_tq}, {"provenance", provenance(r)}};
    if (c.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < b.f_hz.size(); ++i)
            rows.push_back({b.f_hz[i], b.input_vacuum[i], b.loss_main[i], b.loss_filter[i], b.thermal[i],
                            b.total[i], b.pump_off[i]});
        summary.erase("provenance");
        emit_json(c, r,
                  {{"columns", {"f_Hz", "input_vacuum", "loss_main", "loss_filter", "thermal", "total", "pump_off"}},
                   {"rows", rows},
                   {"summary", summary}});
        return;
    }
    std::string s = csv_header(r) + "f_Hz,input_vacuum,loss_main,loss_filter,thermal,total,pump_off\n";
    for (std::size_t i = 0; i < b.f_hz.size(); ++i)
        s += fmt_num(b.f_hz[i]) + "," + fmt_num(b.input_vacuum[i]) + "," + fmt_num(b.loss_main[i]) + "," +
             fmt_num(b.loss_filter[i]) + "," + fmt_num(b.thermal[i]) + "," + fmt_num(b.total[i]) + "," +
             fmt_num(b.pump_off[i]) + "\n";
    emit(c, s);
    std::string sj = summary.dump(2) + "\n";
    if (!summary_path.empty()) {
        std::ofstream f(summary_path, std::ios::binary);
        if (!f) throw UsageError("cannot write summary: " + summary_path);
        f << sj;
    } else if (!c.out.empty() && c.out != "-") {
        std::ofstream f(c.out + ".summary.json", std::ios::binary);
        f << sj;
    } else {
        std::cerr << sj;
    }
}

void cmd_thermal(const Common& c, const Run& r, const std::string& method, bool with_bath) {
    ThermalOptions o;
    o.method = method == "iteration" ? ThermalMethod::iteration : ThermalMethod::bracketed;
    o.include_bath = with_bath;
    auto t = solve_temperature(r.params, o);
    emit_json(c, r,
              {{"T_membrane_K", t.T_membrane}, {"R_K_per_W", t.R}, {"P_a_W", t.P_a}, {"iterations", t.iterations},
               {"residual_K", t.residual}, {"method", method}, {"include_bath", with_bath},
               {"t_over_q_K", t.T_membrane / r.params.Q_m}});
}

void cmd_sensing(const Common& c, const Run& r, std::vector<double> fmods) {
    auto d = derive_closed_form(r.vp);
    if (fmods.empty()) fmods = {filter_fsr(d), 10e6};
    auto s = sensing_matrix(d, fmods);
    json rows = json::array();
    for (std::size_t i = 0; i < fmods.size(); ++i)
        rows.push_back({{"f_mod_hz", fmods[i]},
                        {"main", s.gain(i, 0)},
                        {"filter", s.gain(i, 1)},
                        {"demod_phase_rad", s.demod_phase[i]},
                        {"quadrature_residue", {s.quadrature(i, 0), s.quadrature(i, 1)}}});
    emit_json(c, r, {{"columns", {"main", "filter"}}, {"dof_units", "cavity detuning, Hz"}, {"rows", rows}});
}

void cmd_scan(const Common& c, Run r, const std::string& key, double from, double to, int steps, bool log_steps,
              double tq) {
    if (steps < 1) throw UsageError("--steps must be >= 1");
    if (log_steps && !(from > 0 && to > 0)) throw UsageError("log scan needs positive bounds");
    auto f = freq_grid(c);
    std::string s = csv_header(r) + "value,winding,stable,peak_improvement,peak_f_Hz,delta_os_Hz\n";
    json rows = json::array();
    for (int i = 0; i < steps; ++i) {
        double t = steps == 1 ? 0.0 : double(i) / (steps - 1);
        double v = log_steps ? from * std::pow(to / from, t) : from + t * (to - from);
        ExperimentParams p = r.params;
        detail::set_key(p, key, json(v));
        auto vp = validate(p);
        auto op = make_operating_point(vp);
        int wn = winding_at(op);
        auto b = total_budget(op, f, tq);
        auto pk = b.peak_improvement();
        s += fmt_num(v) + "," + std::to_string(wn) + "," + (wn == 0 ? "true" : "false") + "," + fmt_num(pk.factor) +
             "," + fmt_num(pk.f_hz) + "," + fmt_num(op.dq.delta_os / two_pi) + "\n";
        rows.push_back({v, wn, wn == 0, pk.factor, pk.f_hz, op.dq.delta_os / two_pi});
    }
    if (c.format == "json")
        emit_json(c, r, {{"key", key},
                         {"columns", {"value", "winding", "stable", "peak_improvement", "peak_f_Hz", "delta_os_Hz"}},
                         {"rows", rows}});
    else
        emit(c, s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled-cavity interferometer with an optomechanical amplifier"};
    app.set_version_flag("--version", std::string(QAMP_VERSION));
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("-c,--config", c.config, "JSON parameter file");
    app.add_option("-s,--set", c.overrides, "parameter override key=value (repeatable)");
    app.add_option("-o,--out", c.out, "output file (default stdout)");
    app.add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--f-min", c.f_min, "grid start, Hz");
    app.add_option("--f-max", c.f_max, "grid end, Hz");
    app.add_option("--points", c.points, "grid points");
    app.add_flag("--linear", c.linear, "linear grid (default log)");

    auto* derive_cmd = app.add_subcommand("derive", "derived quantities");
    auto* fields_cmd = app.add_subcommand("fields", "static pump and carrier fields");

    auto* response_cmd = app.add_subcommand("response", "end-mirror motion to readout transfer function");
    std::optional<double> offset_hz;
    bool raw = false;
    response_cmd->add_option("--offset-hz", offset_hz, "pump offset from omega_m, Hz (default: optical spring)");
    response_cmd->add_flag("--raw", raw, "do not normalise to DC");

    auto* nyquist_cmd = app.add_subcommand("nyquist", "Nyquist contour of det(I + M_OL)");
    bool margin = false;
    nyquist_cmd->add_option("--offset-hz", offset_hz, "pump offset from omega_m, Hz");
    nyquist_cmd->add_flag("--margin", margin, "bisect g/omega_c to the instability threshold (json output)");

    auto* noise_cmd = app.add_subcommand("noise-budget", "noise budget");
    std::string tq_arg = "1e-8";
    std::string summary_path;
    noise_cmd->add_option("--t-over-q", tq_arg, "T/Q_m in K, or 'auto' for the self-heating temperature");
    noise_cmd->add_option("--offset-hz", offset_hz, "pump offset from omega_m, Hz");
    noise_cmd->add_option("--summary", summary_path, "write the JSON summary here");

    auto* thermal_cmd = app.add_subcommand("thermal", "membrane self-heating temperature");
    std::string method = "bracketed";
    bool with_bath = false;
    thermal_cmd->add_option("--method", method)->check(CLI::IsMember({"bracketed", "iteration"}));
    thermal_cmd->add_flag("--with-bath", with_bath, "add the bath temperature as a base term");

    auto* sensing_cmd = app.add_subcommand("sensing", "PDH sensing matrix");
    std::vector<double> fmods;
    sensing_cmd->add_option("--f-mod", fmods, "modulation frequencies, Hz (default: filter FSR and 10 MHz)");

    auto* scan_cmd = app.add_subcommand("scan", "1-D parameter sweep");
    std::string key;
    double from = 0, to = 0, scan_tq = 1e-8;
    int steps = 5;
    bool log_steps = false;
    scan_cmd->add_option("--param", key, "parameter name (config key)")->required();
    scan_cmd->add_option("--from", from)->required();
    scan_cmd->add_option("--to", to)->required();
    scan_cmd->add_option("--steps", steps);
    scan_cmd->add_flag("--log", log_steps);
    scan_cmd->add_option("--t-over-q", scan_tq, "T/Q_m in K for the improvement factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Run r;
        r.params = load_config(c.config, c.overrides);
        r.hash = config_hash(r.params);
        r.vp = validate(r.params);
        for (const auto& w : r.vp.warnings) std::cerr << "warning: " << w << "\n";

        if (*derive_cmd) r.command = "derive", cmd_derive(c, r);
        else if (*fields_cmd) r.command = "fields", cmd_fields(c, r);
        else if (*response_cmd) r.command = "response", cmd_response(c, r, offset_hz, raw);
        else if (*nyquist_cmd) r.command = "nyquist", cmd_nyquist(c, r, offset_hz, margin);
        else if (*noise_cmd) r.command = "noise-budget", cmd_noise(c, r, tq_arg, offset_hz, summary_path);
        else if (*thermal_cmd) r.command = "thermal", cmd_thermal(c, r, method, with_bath);
        else if (*sensing_cmd) r.command = "sensing", cmd_sensing(c, r, fmods);
        else if (*scan_cmd) r.command = "scan", cmd_scan(c, r, key, from, to, steps, log_steps, scan_tq);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.module() == "cli" ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
