#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace asca {

enum class FactorKind { Nominal, Ordinal };

struct FactorSpec {
  std::string name;
  std::vector<int> levels;  // level index of every observation
  int n_levels = 0;
  FactorKind kind = FactorKind::Nominal;
  std::optional<std::string> nested_in;
};

struct TermBlock {
  std::string name;
  Eigen::Index first_col = 0;
  Eigen::Index n_cols = 0;
  int df = 0;
};

// Coding matrix with the intercept column first, followed by one block of
// columns per model term.
struct DesignMatrix {
  Eigen::MatrixXd matrix;
  std::vector<TermBlock> blocks;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  const TermBlock& block(std::string_view name) const;  // throws UnknownTerm
  auto block_matrix(const TermBlock& b) const { return matrix.middleCols(b.first_col, b.n_cols); }
  // Model terms, i.e. every block except the intercept.
  std::span<const TermBlock> terms() const { return std::span(blocks).subspan(1); }
};

inline constexpr const char* kInterceptName = "intercept";

std::string interaction_name(std::string_view a, std::string_view b);

// Level l < L-1 codes as the l-th indicator row; the reference level L-1 codes
// as a row of -1.
Eigen::MatrixXd sum_code_nominal(std::span<const int> levels, int n_levels);

// Centered linear trend: level l codes as l - (L-1)/2.
Eigen::MatrixXd code_ordinal(std::span<const int> levels, int n_levels);

// Column-wise products, A-major: column i*Pb + j is A_i .* B_j.
Eigen::MatrixXd interaction_block(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Sum coding of the inner factor applied separately within each outer level.
Eigen::MatrixXd nested_coding(const FactorSpec& outer, const FactorSpec& inner);

Eigen::MatrixXd code_factor(const FactorSpec& factor);

DesignMatrix assemble_design(std::span<const FactorSpec> factors,
                             std::span<const std::pair<std::string, std::string>> interactions,
                             Eigen::Index n_rows);

}  // namespace asca
