#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asca/design.hpp"

namespace support {

inline Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  }
  return x;
}

// Level i repeated `reps` times, levels in order.
inline std::vector<int> blocked_levels(int n_levels, int reps) {
  std::vector<int> out;
  for (int l = 0; l < n_levels; ++l) out.insert(out.end(), static_cast<std::size_t>(reps), l);
  return out;
}

inline asca::FactorSpec factor(std::string name, std::vector<int> levels, int n_levels,
                               asca::FactorKind kind = asca::FactorKind::Nominal) {
  asca::FactorSpec f;
  f.name = std::move(name);
  f.levels = std::move(levels);
  f.n_levels = n_levels;
  f.kind = kind;
  return f;
}

// Fully crossed A x B layout with `reps` replicates per cell; A varies slowest.
struct Crossed {
  asca::FactorSpec a;
  asca::FactorSpec b;
  int n = 0;
};

inline Crossed crossed(int la, int lb, int reps) {
  Crossed c;
  std::vector<int> a, b;
  for (int i = 0; i < la; ++i) {
    for (int j = 0; j < lb; ++j) {
      for (int r = 0; r < reps; ++r) {
        a.push_back(i);
        b.push_back(j);
      }
    }
  }
  c.n = la * lb * reps;
  c.a = factor("A", a, la);
  c.b = factor("B", b, lb);
  return c;
}

inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace support
