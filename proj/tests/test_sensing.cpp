#include <gtest/gtest.h>

#include "qamp/qamp.hpp"

using namespace qamp;

TEST(Sensing, FilterFreeSpectralRange) {
    auto d = derive_closed_form(validate(table_one()));
    EXPECT_NEAR(filter_fsr(d), 74948114.5, 1e-6);
}

TEST(Sensing, TablePattern) {
    auto d = derive_closed_form(validate(table_one()));
    auto s = sensing_matrix(d, {filter_fsr(d), 10e6});
    EXPECT_GT(s.gain(0, 0), 0);
    EXPECT_LT(s.gain(0, 1), 0);
    EXPECT_LT(s.gain(1, 0), 0);
    EXPECT_LT(std::abs(s.gain(1, 1)), 0.05);
    EXPECT_NEAR(s.gain(0, 1) / s.gain(0, 0), -1.0 / 3.0, 0.3 / 3.0);
    EXPECT_NEAR(s.gain(0, 1), -0.34811979, 1e-6);
    EXPECT_NE(s.gain.determinant(), 0.0);
}

TEST(Sensing, RowsNormalised) {
    auto d = derive_closed_form(validate(table_one()));
    auto s = sensing_matrix(d, {filter_fsr(d), 10e6, 30e6});
    for (int i = 0; i < s.gain.rows(); ++i) EXPECT_NEAR(s.gain.row(i).cwiseAbs().maxCoeff(), 1.0, 1e-15);
}

// the demodulation phase removes the quadrature of each row's dominant entry
TEST(Sensing, DominantEntryReal) {
    auto d = derive_closed_form(validate(table_one()));
    auto s = sensing_matrix(d, {filter_fsr(d), 10e6});
    for (int i = 0; i < 2; ++i) {
        int j;
        s.gain.row(i).cwiseAbs().maxCoeff(&j);
        EXPECT_LT(std::abs(s.quadrature(i, j)), 1e-6);
        cd z = -I * s.raw(i, j) * std::polar(1.0, s.demod_phase[i]);
        EXPECT_LT(std::abs(z.imag()), 1e-6 * std::abs(z));
    }
}

TEST(Sensing, DegenerateFrequenciesRejected) {
    auto d = derive_closed_form(validate(table_one()));
    EXPECT_THROW(sensing_matrix(d, {10e6, 10e6}), Error);
}
