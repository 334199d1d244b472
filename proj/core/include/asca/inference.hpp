#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asca/design.hpp"

namespace asca {

struct AnovaTable;

// Name of the permutation generator; recorded in run manifests.
inline constexpr const char* kPermutationRng = "splitmix64-seeded mt19937_64, Fisher-Yates";

struct PermutationOptions {
  std::size_t permutations = 999;
  std::uint64_t seed = 0;
  std::string reference = "residuals";
  unsigned workers = 1;
};

struct PermutationResult {
  std::string term;
  double f_observed = 0.0;
  std::vector<double> f_null;  // one entry per permutation, in permutation order
  std::size_t permutations = 0;
  double p = 1.0;
  std::uint64_t seed = 0;
};

// MS_term / MS_reference; inf when only the reference is zero, nan for 0/0.
double f_ratio(double ms_term, double ms_reference);

// The k-th row permutation of n rows for a seed. Each permutation comes from
// its own generator, so permutations can be produced in any order.
std::vector<std::size_t> permutation_for(std::uint64_t seed, std::size_t k, std::size_t n);

// (#{F*_k >= F} + 1) / (K + 1). Null values within a relative 1e-10 of F count
// as ties so refits that differ only by rounding are not lost.
double permutation_p_value(double f_observed, std::span<const double> f_null);

// Permutes whole rows of X against a fixed design. All terms share the same
// permutation per iteration, so K permutations cost K refits.
std::vector<PermutationResult> permutation_test(const Eigen::MatrixXd& x,
                                                const DesignMatrix& design,
                                                std::span<const std::string> terms,
                                                const PermutationOptions& options);

void apply_p_values(AnovaTable& table, std::span<const PermutationResult> results);

// One column per term, K rows.
void write_null_distribution(std::span<const PermutationResult> results, std::ostream& out);

}  // namespace asca
