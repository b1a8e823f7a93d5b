#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qamp/config.hpp"
#include "qamp/qamp.hpp"

using namespace qamp;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
    EXPECT_EQ(load_config(write_temp("qamp_empty.json", "")), table_one());
    EXPECT_EQ(load_config(""), table_one());
}

TEST(Config, IdempotentOverride) { EXPECT_EQ(load_config("", {"T_m=0.8"}), table_one()); }

TEST(Config, Precedence) {
    auto path = write_temp("qamp_prec.json", R"({"T_m": 0.5, "g_ratio": 0.8})");
    auto p = load_config(path, {"T_m=0.6"});
    EXPECT_EQ(p.T_m, 0.6);      // override beats file
    EXPECT_EQ(p.g_ratio, 0.8);  // file beats default
    EXPECT_EQ(p.L_0, table_one().L_0);
}

TEST(Config, FrequenciesInHz) {
    auto p = load_config("", {"omega_m_hz=150000"});
    EXPECT_NEAR(p.omega_m, two_pi * 150000, 1e-6);
    EXPECT_EQ(load_config("", {"omega_m=150000"}), p);
    auto d = derive(validate(p));
    EXPECT_EQ(d.params.omega_m, p.omega_m);
    EXPECT_NEAR(d.omega_p - p.omega_m, d.delta_os, 1e-6 * d.delta_os);
}

TEST(Config, RoundTripThroughJson) {
    ExperimentParams p;
    p.eps_f = 1234e-6;
    p.coupling_mode = CouplingMode::from_power;
    auto path = write_temp("qamp_rt.json", params_to_json(p).dump());
    auto q = load_config(path);
    EXPECT_EQ(config_hash(q), config_hash(p));
    EXPECT_EQ(q.coupling_mode, CouplingMode::from_power);
    EXPECT_NEAR(q.eps_f, p.eps_f, 1e-18);
}

TEST(Config, HashSensitiveAndStable) {
    EXPECT_EQ(config_hash(table_one()), config_hash(table_one()));
    EXPECT_NE(config_hash(table_one()), config_hash(load_config("", {"eps_0=11e-6"})));
    EXPECT_EQ(config_hash(table_one()).size(), 16u);
}

TEST(Config, Errors) {
    EXPECT_THROW(load_config("", {"foo=1"}), Error);
    EXPECT_THROW(load_config("", {"T_m"}), Error);
    EXPECT_THROW(load_config("", {"T_m=abc"}), Error);
    EXPECT_THROW(load_config(write_temp("qamp_bad.json", "{ not json")), Error);
    EXPECT_THROW(load_config("/nonexistent/qamp.json"), Error);
    try {
        load_config("", {"foo=1"});
    } catch (const Error& e) {
        EXPECT_EQ(e.module(), "cli");
    }
}

TEST(Parallel, ThreadCountFromEnvironment) {
    setenv("QAMP_THREADS", "3", 1);
    EXPECT_EQ(thread_count(), 3u);
    unsetenv("QAMP_THREADS");
    EXPECT_GE(thread_count(), 1u);
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) EXPECT_EQ(h, 1);
}
