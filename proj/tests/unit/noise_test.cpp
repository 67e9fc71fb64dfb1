#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stochns/assembly.hpp"
#include "stochns/noise.hpp"

namespace stochns {
namespace {

// Known-answer vectors published with the Random123 library (philox4x32-10).
TEST(Philox, KnownAnswerZero) {
  const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto r = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(ModeWeight, Values) {
  EXPECT_DOUBLE_EQ(mode_weight(1, 1), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(mode_weight(1, 2), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(mode_weight(2, 1), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(mode_weight(2, 2), 1.0 / 16.0);
  EXPECT_THROW(mode_weight(0, 1), std::invalid_argument);
}

TEST(WienerPath, DeterministicAndShaped) {
  const WienerPath a = generate_path(7, 3, 64, 4);
  const WienerPath b = generate_path(7, 3, 64, 4);
  EXPECT_EQ(a.xi.size(), 64u * 16u);
  EXPECT_EQ(a.xi, b.xi);
  EXPECT_DOUBLE_EQ(a.fine_step, 1.0 / 64.0);
  EXPECT_NE(generate_path(8, 3, 64, 4).xi, a.xi);
  EXPECT_NE(generate_path(7, 4, 64, 4).xi, a.xi);
  EXPECT_THROW(generate_path(7, 0, 0, 4), std::invalid_argument);
  EXPECT_THROW(generate_path(7, 0, 4, 0), std::invalid_argument);
}

TEST(WienerPath, PrefixStableAcrossLengths) {
  // Draw (step, mode) depends only on its flat index, not on M0.
  const WienerPath a = generate_path(1, 0, 8, 2);
  const WienerPath b = generate_path(1, 0, 16, 2);
  for (std::size_t i = 0; i < a.xi.size(); ++i) EXPECT_EQ(a.xi[i], b.xi[i]);
}

TEST(WienerPath, MomentsOfDraws) {
  const WienerPath p = generate_path(20240601, 0, 6250, 4);  // 10^5 draws
  double mean = 0.0, m2 = 0.0;
  for (double x : p.xi) mean += x;
  mean /= p.xi.size();
  for (double x : p.xi) m2 += (x - mean) * (x - mean);
  const double var = m2 / (p.xi.size() - 1);
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(p.xi.size())));
  EXPECT_GE(var, 0.98);
  EXPECT_LE(var, 1.02);
}

TEST(WienerPath, DistinctPathsUncorrelated) {
  const WienerPath a = generate_path(99, 0, 625, 4);  // 10^4 draws
  const WienerPath b = generate_path(99, 1, 625, 4);
  const double n = static_cast<double>(a.xi.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.xi.size(); ++i) { ma += a.xi[i]; mb += b.xi[i]; }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.xi.size(); ++i) {
    sab += (a.xi[i] - ma) * (b.xi[i] - mb);
    saa += (a.xi[i] - ma) * (a.xi[i] - ma);
    sbb += (b.xi[i] - mb) * (b.xi[i] - mb);
  }
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.04);
}

TEST(CoarseIncrement, RatioOneIsFineIncrement) {
  const WienerPath p = generate_path(5, 2, 16, 3);
  for (int n = 0; n < 16; ++n) {
    const ModeIncrement inc = coarse_mode_increment(p, n, 1);
    for (int j1 = 1; j1 <= 3; ++j1)
      for (int j2 = 1; j2 <= 3; ++j2) EXPECT_EQ(inc(j1 - 1, j2 - 1), p.fine_increment(n, j1, j2));
  }
}

TEST(CoarseIncrement, AdditiveBitwise) {
  const WienerPath p = generate_path(5, 2, 64, 2);
  for (int r : {2, 4, 8, 32, 64}) {
    for (int n = 0; n < 64 / r; ++n) {
      const ModeIncrement inc = coarse_mode_increment(p, n, r);
      for (int j1 = 1; j1 <= 2; ++j1) {
        for (int j2 = 1; j2 <= 2; ++j2) {
          double sum = 0.0;
          for (int i = 0; i < r; ++i) sum += p.fine_increment(r * n + i, j1, j2);
          EXPECT_EQ(inc(j1 - 1, j2 - 1), sum);
        }
      }
    }
  }
  const ModeIncrement two = coarse_mode_increment(p, 3, 2);
  EXPECT_EQ(two(0, 1), p.fine_increment(6, 1, 2) + p.fine_increment(7, 1, 2));
}

TEST(CoarseIncrement, TotalsAgreeAcrossRatios) {
  const WienerPath p = generate_path(11, 0, 512, 4);
  for (int r : {8, 16, 32}) {
    ModeIncrement coarse = ModeIncrement::Zero(4, 4), fine = ModeIncrement::Zero(4, 4);
    for (int n = 0; n < 512 / r; ++n) coarse += coarse_mode_increment(p, n, r);
    for (int n = 0; n < 512; ++n) fine += coarse_mode_increment(p, n, 1);
    EXPECT_LT((coarse - fine).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(CoarseIncrement, ErrorsOnBadArguments) {
  const WienerPath p = generate_path(5, 2, 12, 1);
  EXPECT_THROW(coarse_mode_increment(p, 0, 5), std::invalid_argument);
  EXPECT_THROW(coarse_mode_increment(p, 3, 4), std::out_of_range);
  EXPECT_THROW(coarse_mode_increment(p, -1, 1), std::out_of_range);
}

TEST(CoarseIncrement, VarianceMatchesBrownianScaling) {
  // Mode (1,1), r = 4: Var = 4 k0 lambda = k0.
  const int paths = 100000;
  const int fine = 4;
  const double k0 = 1.0 / fine;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < paths; ++i) {
    const double x = coarse_mode_increment(generate_path(123, i, fine, 1), 0, 4)(0, 0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / paths;
  const double var = s2 / paths - mean * mean;
  const double se = k0 * std::sqrt(2.0 / paths);
  EXPECT_NEAR(var, k0, 3.0 * se);
}

TEST(StochasticLoad, LinearityAndErrors) {
  const auto disc = make_discretization(4, 2);
  ModeIncrement zero = ModeIncrement::Zero(2, 2);
  EXPECT_EQ(stochastic_load(disc->forms, zero, 10.0).cwiseAbs().maxCoeff(), 0.0);
  ModeIncrement single = zero;
  single(0, 0) = 0.3;
  const Eigen::VectorXd l = stochastic_load(disc->forms, single, 10.0);
  EXPECT_LT((l - 3.0 * disc->forms.noise_load(1, 1)).cwiseAbs().maxCoeff(), 1e-15);
  ModeIncrement a = ModeIncrement::Random(2, 2), b = ModeIncrement::Random(2, 2);
  const Eigen::VectorXd lab = stochastic_load(disc->forms, 2.0 * a - b, 10.0);
  const Eigen::VectorXd comb = 2.0 * stochastic_load(disc->forms, a, 10.0) - stochastic_load(disc->forms, b, 10.0);
  EXPECT_LT((lab - comb).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_THROW(stochastic_load(disc->forms, ModeIncrement::Zero(3, 3), 10.0), std::invalid_argument);
}

TEST(PathIo, RoundTripIsBitwise) {
  const WienerPath p = generate_path(0xfedcba9876543210ull, 42, 16, 3);
  std::stringstream ss;
  write_path(ss, p);
  const WienerPath q = read_path(ss);
  EXPECT_EQ(q.master_seed, p.master_seed);
  EXPECT_EQ(q.path_index, p.path_index);
  EXPECT_EQ(q.fine_steps, 16);
  EXPECT_EQ(q.modes, 3);
  EXPECT_EQ(q.xi, p.xi);
}

TEST(PathIo, MalformedInputThrows) {
  std::stringstream bad("1 2 x 4\n");
  EXPECT_THROW(read_path(bad), std::runtime_error);
  std::stringstream truncated("1 2 2 1\n0.5\n");
  EXPECT_THROW(read_path(truncated), std::runtime_error);
}

}  // namespace
}  // namespace stochns
