#include "asca/inference.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "asca/error.hpp"
#include "asca/factorization.hpp"

namespace asca {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, bound) by rejection; independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = engine();
  while (draw >= limit) draw = engine();
  return draw % bound;
}

// Per-term sums of squares for one coefficient matrix.
class TermScorer {
 public:
  TermScorer(const DesignMatrix& design, std::span<const std::string> terms, const std::string& reference,
             double ss_floor)
      : gram_(design.matrix.transpose() * design.matrix), ss_floor_(ss_floor) {
    for (const auto& name : terms) blocks_.push_back(design.block(name));
    reference_is_residual_ = reference == kResidualsName;
    if (!reference_is_residual_) reference_block_ = design.block(reference);
    residual_df_ = static_cast<double>(design.rows() - design.cols());
    if (residual_df_ <= 0) throw Error(ErrorCode::NoResidualDf, "no residual degrees of freedom");
  }

  // F per term for coefficients theta of data with squared norm x_ss.
  void score(const Eigen::MatrixXd& theta, double x_ss, std::vector<double>& out) const {
    const Eigen::MatrixXd g_theta = gram_ * theta;
    double ref_ms = 0.0;
    if (reference_is_residual_) {
      const double fitted_ss = g_theta.cwiseProduct(theta).sum();
      ref_ms = snap(x_ss - fitted_ss) / residual_df_;
    } else {
      ref_ms = snap(block_ss(theta, reference_block_)) / reference_block_.df;
    }
    out.resize(blocks_.size());
    for (std::size_t t = 0; t < blocks_.size(); ++t) {
      out[t] = f_ratio(snap(block_ss(theta, blocks_[t])) / blocks_[t].df, ref_ms);
    }
  }

 private:
  double snap(double ss) const { return ss <= ss_floor_ ? 0.0 : ss; }

  double block_ss(const Eigen::MatrixXd& theta, const TermBlock& b) const {
    const auto th = theta.middleRows(b.first_col, b.n_cols);
    return (gram_.block(b.first_col, b.first_col, b.n_cols, b.n_cols) * th).cwiseProduct(th).sum();
  }

  Eigen::MatrixXd gram_;
  double ss_floor_ = 0.0;
  std::vector<TermBlock> blocks_;
  bool reference_is_residual_ = true;
  TermBlock reference_block_;
  double residual_df_ = 0.0;
};

}  // namespace

double f_ratio(double ms_term, double ms_reference) {
  if (ms_reference > 0.0) return ms_term / ms_reference;
  if (ms_term > 0.0) return std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<std::size_t> permutation_for(std::uint64_t seed, std::size_t k, std::size_t n) {
  std::mt19937_64 engine(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k))));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(engine, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

double permutation_p_value(double f_observed, std::span<const double> f_null) {
  if (std::isnan(f_observed)) return std::numeric_limits<double>::quiet_NaN();
  const double threshold = std::isinf(f_observed) ? f_observed : f_observed - 1e-10 * std::abs(f_observed);
  std::size_t at_least = 0;
  for (double f : f_null) {
    if (f >= threshold) ++at_least;
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(f_null.size() + 1);
}

std::vector<PermutationResult> permutation_test(const Eigen::MatrixXd& x,
                                                const DesignMatrix& design,
                                                std::span<const std::string> terms,
                                                const PermutationOptions& options) {
  if (options.permutations == 0) throw Error(ErrorCode::KZero, "at least one permutation is required");
  if (x.rows() != design.rows()) throw Error(ErrorCode::ShapeMismatch, "data and design row counts differ");
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "data contains NaN or infinite values");

  const LeastSquares solver(design.matrix);
  const Eigen::MatrixXd& pinv = solver.pseudo_inverse();
  // Row permutations leave column means alone and the intercept absorbs them,
  // so working on centered data changes only the intercept coefficients while
  // keeping the residual SS (total minus fitted) free of cancellation.
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const TermScorer scorer(design, terms, options.reference, 1e-24 * x.squaredNorm());
  const double x_ss = xc.squaredNorm();
  const auto n = static_cast<std::size_t>(x.rows());
  const std::size_t k_total = options.permutations;

  std::vector<double> observed;
  scorer.score(pinv * xc, x_ss, observed);

  // null[k * terms + t]
  std::vector<double> null(k_total * terms.size());
  auto worker = [&](std::size_t first, std::size_t stride) {
    Eigen::MatrixXd pinv_perm(pinv.rows(), pinv.cols());
    std::vector<double> f;
    for (std::size_t k = first; k < k_total; k += stride) {
      const auto perm = permutation_for(options.seed, k, n);
      // Row i of X* is row perm[i] of X, so pinv * X* = pinv_perm * X.
      for (std::size_t i = 0; i < n; ++i) {
        pinv_perm.col(static_cast<Eigen::Index>(perm[i])) = pinv.col(static_cast<Eigen::Index>(i));
      }
      scorer.score(pinv_perm * xc, x_ss, f);
      std::copy(f.begin(), f.end(), null.begin() + static_cast<std::ptrdiff_t>(k * terms.size()));
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(k_total)));
  if (workers == 1) {
    worker(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w, workers);
  }

  std::vector<PermutationResult> results;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    PermutationResult r;
    r.term = terms[t];
    r.f_observed = observed[t];
    r.permutations = k_total;
    r.seed = options.seed;
    r.f_null.resize(k_total);
    for (std::size_t k = 0; k < k_total; ++k) r.f_null[k] = null[k * terms.size() + t];
    r.p = permutation_p_value(r.f_observed, r.f_null);
    results.push_back(std::move(r));
  }
  return results;
}

void apply_p_values(AnovaTable& table, std::span<const PermutationResult> results) {
  for (const auto& r : results) {
    auto& row = table.row(r.term);
    if (!std::isnan(r.p)) row.p = r.p;
  }
}

void write_null_distribution(std::span<const PermutationResult> results, std::ostream& out) {
  for (std::size_t t = 0; t < results.size(); ++t) out << (t ? "," : "") << results[t].term;
  out << '\n';
  const std::size_t k_total = results.empty() ? 0 : results.front().f_null.size();
  char buf[40];
  for (std::size_t k = 0; k < k_total; ++k) {
    for (std::size_t t = 0; t < results.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.10g", results[t].f_null[k]);
      out << (t ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace asca
