#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "stochns/assembly.hpp"

namespace stochns {

/// Philox4x32-10 counter-based generator: a keyed bijection on 128-bit counters.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Per-mode increments, entry (j1-1, j2-1).
using ModeIncrement = Eigen::MatrixXd;

/// Truncated spectral Wiener path sampled on the finest time grid.
///
/// xi holds standard normal draws in row-major order (step, j1, j2). Draw e is
/// produced from Philox counter (e / 2, path_index) under key master_seed, so
/// every (master_seed, path_index) pair owns a disjoint substream.
struct WienerPath {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
  int fine_steps = 0;
  int modes = 0;
  double fine_step = 0.0;
  std::vector<double> xi;

  double draw(int step, int j1, int j2) const {
    return xi[(static_cast<std::size_t>(step) * modes + (j1 - 1)) * modes + (j2 - 1)];
  }

  /// sqrt(k0) * sqrt(lambda_{j1,j2}) * xi^step_{j1,j2}.
  double fine_increment(int step, int j1, int j2) const;
};

WienerPath generate_path(std::uint64_t master_seed, std::uint64_t path_index, int fine_steps,
                         int modes, double final_time = 1.0);

/// lambda_{j1,j2} = 1 / (j1 + j2)^2.
double mode_weight(int j1, int j2);

/// Increment over coarse step [r*n*k0, r*(n+1)*k0]: for every mode, the fine
/// increments r*n, ..., r*n + r - 1 summed in ascending order starting from 0.
ModeIncrement coarse_mode_increment(const WienerPath& path, int coarse_step, int refinement_ratio);

/// g_scale * sum_{j1,j2} increment(j1,j2) * (e_{j1,j2}, phi_i).
Eigen::VectorXd stochastic_load(const AssembledForms& forms, const ModeIncrement& increment,
                                double g_scale);
void stochastic_load(const AssembledForms& forms, const ModeIncrement& increment, double g_scale,
                     Eigen::VectorXd& out);

/// Text dump: header "master_seed path_index fine_steps modes" then one line
/// per fine step with the J*J draws in row-major order.
void write_path(std::ostream& os, const WienerPath& path);
WienerPath read_path(std::istream& is, double final_time = 1.0);

}  // namespace stochns
