#include "stochns/noise.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace stochns {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Open interval (0, 1) from the top 53 bits.
double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double mode_weight(int j1, int j2) {
  if (j1 < 1 || j2 < 1) throw std::invalid_argument("mode_weight: mode indices start at 1");
  const double s = j1 + j2;
  return 1.0 / (s * s);
}

double WienerPath::fine_increment(int step, int j1, int j2) const {
  return std::sqrt(fine_step) * std::sqrt(mode_weight(j1, j2)) * draw(step, j1, j2);
}

WienerPath generate_path(std::uint64_t master_seed, std::uint64_t path_index, int fine_steps,
                         int modes, double final_time) {
  if (fine_steps < 1) throw std::invalid_argument("generate_path: fine_steps must be >= 1");
  if (modes < 1) throw std::invalid_argument("generate_path: J must be >= 1");
  WienerPath path;
  path.master_seed = master_seed;
  path.path_index = path_index;
  path.fine_steps = fine_steps;
  path.modes = modes;
  path.fine_step = final_time / fine_steps;

  const std::size_t count = static_cast<std::size_t>(fine_steps) * modes * modes;
  path.xi.resize(count);
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(master_seed),
                                            static_cast<std::uint32_t>(master_seed >> 32)};
  for (std::size_t block = 0; 2 * block < count; ++block) {
    const auto b = static_cast<std::uint64_t>(block);
    const auto r = philox4x32({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                               static_cast<std::uint32_t>(path_index),
                               static_cast<std::uint32_t>(path_index >> 32)},
                              key);
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    path.xi[2 * block] = radius * std::cos(angle);
    if (2 * block + 1 < count) path.xi[2 * block + 1] = radius * std::sin(angle);
  }
  return path;
}

ModeIncrement coarse_mode_increment(const WienerPath& path, int coarse_step, int r) {
  if (r < 1 || path.fine_steps % r != 0) {
    throw std::invalid_argument("coarse_mode_increment: refinement ratio must divide the fine step count");
  }
  if (coarse_step < 0 || coarse_step >= path.fine_steps / r) {
    throw std::out_of_range("coarse_mode_increment: coarse step " + std::to_string(coarse_step) +
                            " out of range");
  }
  const int J = path.modes;
  ModeIncrement inc = ModeIncrement::Zero(J, J);
  for (int j1 = 1; j1 <= J; ++j1) {
    for (int j2 = 1; j2 <= J; ++j2) {
      double sum = 0.0;
      for (int i = 0; i < r; ++i) sum += path.fine_increment(r * coarse_step + i, j1, j2);
      inc(j1 - 1, j2 - 1) = sum;
    }
  }
  return inc;
}

void stochastic_load(const AssembledForms& forms, const ModeIncrement& increment, double g_scale,
                     Eigen::VectorXd& out) {
  const int J = forms.noise_modes;
  if (increment.rows() != J || increment.cols() != J) {
    throw std::invalid_argument("stochastic_load: increment has " + std::to_string(increment.rows()) +
                                " modes, forms were assembled for " + std::to_string(J));
  }
  out.setZero(forms.mass.rows());
  for (int j1 = 1; j1 <= J; ++j1) {
    for (int j2 = 1; j2 <= J; ++j2) {
      out += (g_scale * increment(j1 - 1, j2 - 1)) * forms.noise_load(j1, j2);
    }
  }
}

Eigen::VectorXd stochastic_load(const AssembledForms& forms, const ModeIncrement& increment,
                                double g_scale) {
  Eigen::VectorXd out;
  stochastic_load(forms, increment, g_scale, out);
  return out;
}

void write_path(std::ostream& os, const WienerPath& path) {
  os << path.master_seed << ' ' << path.path_index << ' ' << path.fine_steps << ' ' << path.modes << '\n';
  os << std::setprecision(17);
  const int per_step = path.modes * path.modes;
  for (int s = 0; s < path.fine_steps; ++s) {
    for (int e = 0; e < per_step; ++e) {
      os << (e ? " " : "") << path.xi[static_cast<std::size_t>(s) * per_step + e];
    }
    os << '\n';
  }
}

WienerPath read_path(std::istream& is, double final_time) {
  WienerPath path;
  if (!(is >> path.master_seed >> path.path_index >> path.fine_steps >> path.modes) ||
      path.fine_steps < 1 || path.modes < 1) {
    throw std::runtime_error("read_path: malformed header");
  }
  path.fine_step = final_time / path.fine_steps;
  path.xi.resize(static_cast<std::size_t>(path.fine_steps) * path.modes * path.modes);
  for (double& v : path.xi) {
    if (!(is >> v)) throw std::runtime_error("read_path: truncated draw table");
  }
  return path;
}

}  // namespace stochns
