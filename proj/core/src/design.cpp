#include "asca/design.hpp"

#include <map>
#include <set>

#include "asca/error.hpp"

namespace asca {
namespace {

void check_levels(std::span<const int> levels, int n_levels) {
  if (n_levels < 2) {
    throw Error(ErrorCode::DegenerateFactor, "a factor needs at least 2 levels, got " +
                                                 std::to_string(n_levels));
  }
  for (int l : levels) {
    if (l < 0 || l >= n_levels) {
      throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(l) + " outside [0, " +
                                                  std::to_string(n_levels) + ")");
    }
  }
}

const FactorSpec& find_factor(std::span<const FactorSpec> factors, const std::string& name) {
  for (const auto& f : factors) {
    if (f.name == name) return f;
  }
  throw Error(ErrorCode::UnknownFactor, "no factor named '" + name + "'");
}

}  // namespace

const TermBlock& DesignMatrix::block(std::string_view name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  throw Error(ErrorCode::UnknownTerm, "no term named '" + std::string(name) + "'");
}

std::string interaction_name(std::string_view a, std::string_view b) {
  return std::string(a) + ":" + std::string(b);
}

Eigen::MatrixXd sum_code_nominal(std::span<const int> levels, int n_levels) {
  check_levels(levels, n_levels);
  Eigen::MatrixXd coding = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(levels.size()), n_levels - 1);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (levels[i] == n_levels - 1) coding.row(r).setConstant(-1.0);
    else coding(r, levels[i]) = 1.0;
  }
  return coding;
}

Eigen::MatrixXd code_ordinal(std::span<const int> levels, int n_levels) {
  check_levels(levels, n_levels);
  const double center = (n_levels - 1) / 2.0;
  Eigen::MatrixXd coding(static_cast<Eigen::Index>(levels.size()), 1);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    coding(static_cast<Eigen::Index>(i), 0) = levels[i] - center;
  }
  return coding;
}

Eigen::MatrixXd interaction_block(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "interaction blocks have " + std::to_string(a.rows()) +
                                              " and " + std::to_string(b.rows()) + " rows");
  }
  Eigen::MatrixXd out(a.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      out.col(i * b.cols() + j) = a.col(i).cwiseProduct(b.col(j));
    }
  }
  return out;
}

Eigen::MatrixXd nested_coding(const FactorSpec& outer, const FactorSpec& inner) {
  if (outer.levels.size() != inner.levels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "nested factors differ in length");
  }
  if (outer.n_levels < 1 || inner.n_levels < 1) {
    throw Error(ErrorCode::DegenerateFactor, "nested factor without levels");
  }
  for (std::size_t i = 0; i < inner.levels.size(); ++i) {
    if (outer.levels[i] < 0 || outer.levels[i] >= outer.n_levels || inner.levels[i] < 0 ||
        inner.levels[i] >= inner.n_levels) {
      throw Error(ErrorCode::LevelOutOfRange, "nested level out of range");
    }
  }
  // Owner of each inner level, and the ordered inner levels under each outer level.
  std::vector<int> owner(static_cast<std::size_t>(inner.n_levels), -1);
  for (std::size_t i = 0; i < inner.levels.size(); ++i) {
    int& o = owner[static_cast<std::size_t>(inner.levels[i])];
    if (o >= 0 && o != outer.levels[i]) {
      throw Error(ErrorCode::NotProperlyNested, "level " + std::to_string(inner.levels[i]) + " of '" +
                                                    inner.name + "' occurs under several levels of '" +
                                                    outer.name + "'");
    }
    o = outer.levels[i];
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(outer.n_levels));
  for (int l = 0; l < inner.n_levels; ++l) {
    if (owner[static_cast<std::size_t>(l)] >= 0) members[static_cast<std::size_t>(owner[static_cast<std::size_t>(l)])].push_back(l);
  }

  const auto n = static_cast<Eigen::Index>(inner.levels.size());
  Eigen::Index total_cols = 0;
  for (const auto& m : members) total_cols += m.empty() ? 0 : static_cast<Eigen::Index>(m.size()) - 1;
  Eigen::MatrixXd coding = Eigen::MatrixXd::Zero(n, total_cols);
  Eigen::Index col0 = 0;
  for (const auto& m : members) {
    if (m.size() < 2) continue;
    std::map<int, int> local;
    for (std::size_t k = 0; k < m.size(); ++k) local[m[k]] = static_cast<int>(k);
    const int last = static_cast<int>(m.size()) - 1;
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto it = local.find(inner.levels[static_cast<std::size_t>(r)]);
      if (it == local.end()) continue;
      if (it->second == last) coding.row(r).segment(col0, last).setConstant(-1.0);
      else coding(r, col0 + it->second) = 1.0;
    }
    col0 += last;
  }
  return coding;
}

Eigen::MatrixXd code_factor(const FactorSpec& factor) {
  return factor.kind == FactorKind::Ordinal ? code_ordinal(factor.levels, factor.n_levels)
                                            : sum_code_nominal(factor.levels, factor.n_levels);
}

DesignMatrix assemble_design(std::span<const FactorSpec> factors,
                             std::span<const std::pair<std::string, std::string>> interactions,
                             Eigen::Index n_rows) {
  std::set<std::string> names;
  for (const auto& f : factors) {
    if (!names.insert(f.name).second) {
      throw Error(ErrorCode::DuplicateFactorName, "factor '" + f.name + "' declared twice");
    }
    if (static_cast<Eigen::Index>(f.levels.size()) != n_rows) {
      throw Error(ErrorCode::ShapeMismatch, "factor '" + f.name + "' has " +
                                                std::to_string(f.levels.size()) + " levels for " +
                                                std::to_string(n_rows) + " rows");
    }
  }

  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks;
  std::map<std::string, Eigen::MatrixXd> factor_blocks;
  blocks.emplace_back(kInterceptName, Eigen::MatrixXd::Ones(n_rows, 1));
  for (const auto& f : factors) {
    Eigen::MatrixXd coding;
    if (f.nested_in) {
      if (*f.nested_in == f.name) {
        throw Error(ErrorCode::NotProperlyNested, "factor '" + f.name + "' nested in itself");
      }
      coding = nested_coding(find_factor(factors, *f.nested_in), f);
    } else {
      coding = code_factor(f);
    }
    factor_blocks[f.name] = coding;
    blocks.emplace_back(f.name, std::move(coding));
  }
  for (const auto& [a, b] : interactions) {
    const auto& fa = find_factor(factors, a);
    const auto& fb = find_factor(factors, b);
    if ((fa.nested_in && *fa.nested_in == b) || (fb.nested_in && *fb.nested_in == a)) {
      throw Error(ErrorCode::InteractionWithNestedPair,
                  "'" + a + "' and '" + b + "' are nested; their interaction is confounded");
    }
    const auto name = interaction_name(a, b);
    if (!names.insert(name).second) {
      throw Error(ErrorCode::DuplicateFactorName, "term '" + name + "' declared twice");
    }
    blocks.emplace_back(name, interaction_block(factor_blocks.at(a), factor_blocks.at(b)));
  }

  DesignMatrix design;
  Eigen::Index total = 0;
  for (const auto& [name, m] : blocks) total += m.cols();
  design.matrix.resize(n_rows, total);
  Eigen::Index col = 0;
  for (auto& [name, m] : blocks) {
    design.matrix.middleCols(col, m.cols()) = m;
    design.blocks.push_back({name, col, m.cols(), static_cast<int>(m.cols())});
    col += m.cols();
  }
  return design;
}

}  // namespace asca
