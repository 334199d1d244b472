#include "asca/factorization.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "asca/error.hpp"
#include "asca/inference.hpp"

namespace asca {
namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_number(const std::string& field) {
  if (field == "inf") return HUGE_VAL;
  if (field == "-inf") return -HUGE_VAL;
  if (field == "nan") return std::nan("");
  std::size_t used = 0;
  const double v = std::stod(field, &used);
  if (used != field.size()) throw Error(ErrorCode::ParseError, "bad number '" + field + "'");
  return v;
}

}  // namespace

const Eigen::MatrixXd& EffectDecomposition::effect(std::string_view term) const {
  for (const auto& e : effects) {
    if (e.term == term) return e.matrix;
  }
  throw Error(ErrorCode::UnknownTerm, "no effect for term '" + std::string(term) + "'");
}

Eigen::MatrixXd EffectDecomposition::fitted_without_mean() const {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(residuals.rows(), residuals.cols());
  for (const auto& e : effects) sum += e.matrix;
  return sum;
}

LeastSquares::LeastSquares(const Eigen::MatrixXd& design)
    : cols_(design.cols()), qr_(design), cod_(design) {
  rank_ = qr_.rank();
  pinv_ = cod_.pseudoInverse();
}

Eigen::MatrixXd LeastSquares::solve(const Eigen::MatrixXd& x) const {
  if (full_rank()) return qr_.solve(x);
  return cod_.solve(x);
}

EffectDecomposition fit(const Eigen::MatrixXd& x, const DesignMatrix& design) {
  if (x.rows() != design.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "data has " + std::to_string(x.rows()) +
                                              " rows, design has " + std::to_string(design.rows()));
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "data contains NaN or infinite values");

  const LeastSquares solver(design.matrix);
  EffectDecomposition dec;
  dec.coefficients = solver.solve(x);
  dec.rank = solver.rank();
  dec.rank_deficient = !solver.full_rank();
  if (dec.rank_deficient) {
    dec.warnings.push_back("RankDeficient: design rank " + std::to_string(dec.rank) + " < " +
                           std::to_string(design.cols()) + " columns; minimum-norm solution used");
  }
  dec.grand_mean = dec.coefficients.row(0);
  for (const auto& b : design.terms()) {
    dec.effects.push_back(
        {b.name, design.block_matrix(b) * dec.coefficients.middleRows(b.first_col, b.n_cols)});
  }
  dec.residuals = x - design.matrix * dec.coefficients;
  dec.centered_total_ss = (x.rowwise() - x.colwise().mean()).squaredNorm();
  return dec;
}

const AnovaRow& AnovaTable::row(std::string_view term) const {
  for (const auto& r : terms) {
    if (r.term == term) return r;
  }
  if (term == residual.term) return residual;
  if (term == total.term) return total;
  throw Error(ErrorCode::UnknownTerm, "no table row '" + std::string(term) + "'");
}

AnovaRow& AnovaTable::row(std::string_view term) {
  return const_cast<AnovaRow&>(std::as_const(*this).row(term));
}

AnovaTable anova_table(const EffectDecomposition& dec, const DesignMatrix& design,
                       std::string_view reference) {
  const auto n = dec.residuals.rows();
  const int residual_df = static_cast<int>(n - design.cols());
  if (residual_df <= 0) {
    throw Error(ErrorCode::NoResidualDf, "N = " + std::to_string(n) + " leaves no residual degrees of freedom for " +
                                             std::to_string(design.cols()) + " coding columns");
  }
  AnovaTable table;
  table.reference = std::string(reference);
  table.warnings = dec.warnings;
  // Sums of squares at the rounding floor of the raw data are exact zeros that
  // the solver could not hit; snapping them keeps 0/0 F ratios recognisable.
  const double raw_ss = dec.centered_total_ss + static_cast<double>(n) * dec.grand_mean.squaredNorm();
  auto snap = [floor = 1e-24 * raw_ss](double ss) { return ss <= floor ? 0.0 : ss; };
  const double total_ss = snap(dec.centered_total_ss);
  auto pct = [total_ss](double ss) { return total_ss > 0.0 ? 100.0 * ss / total_ss : 0.0; };

  for (const auto& b : design.terms()) {
    AnovaRow r;
    r.term = b.name;
    r.ss = snap(dec.effect(b.name).squaredNorm());
    r.df = b.df;
    r.ms = r.ss / r.df;
    r.pct_ss = pct(r.ss);
    table.terms.push_back(r);
  }
  table.residual.term = kResidualsName;
  table.residual.ss = snap(dec.residuals.squaredNorm());
  table.residual.df = residual_df;
  table.residual.ms = table.residual.ss / residual_df;
  table.residual.pct_ss = pct(table.residual.ss);

  table.total.term = "total";
  table.total.ss = total_ss;
  table.total.df = static_cast<int>(n - 1);
  table.total.ms = n > 1 ? total_ss / static_cast<double>(n - 1) : 0.0;
  table.total.pct_ss = table.residual.pct_ss;
  for (const auto& r : table.terms) table.total.pct_ss += r.pct_ss;

  const double ref_ms = table.row(reference).ms;
  bool zero_reference = false;
  for (auto& r : table.terms) {
    if (r.term == reference) continue;
    r.f = f_ratio(r.ms, ref_ms);
    if (ref_ms == 0.0) zero_reference = true;
  }
  if (zero_reference) {
    table.warnings.push_back("ZeroResidualVariance: reference '" + std::string(reference) +
                             "' has zero mean squares; F reported as inf (or nan for 0/0)");
  }
  return table;
}

AnovaTable univariate_anova(const Eigen::VectorXd& x, const DesignMatrix& design,
                            std::size_t permutations, std::uint64_t seed) {
  const Eigen::MatrixXd column = x;
  auto table = anova_table(fit(column, design), design);
  std::vector<std::string> terms;
  for (const auto& b : design.terms()) terms.push_back(b.name);
  PermutationOptions options;
  options.permutations = permutations;
  options.seed = seed;
  apply_p_values(table, permutation_test(column, design, terms, options));
  return table;
}

void write_table_csv(const AnovaTable& table, std::ostream& out) {
  out << "term,SS,%SS,df,MS,F,p\n";
  auto emit = [&out](const AnovaRow& r) {
    out << r.term << ',' << format_number(r.ss) << ',' << format_number(r.pct_ss) << ',' << r.df
        << ',' << format_number(r.ms) << ',' << (r.f ? format_number(*r.f) : "") << ','
        << (r.p ? format_number(*r.p) : "") << '\n';
  };
  for (const auto& r : table.terms) emit(r);
  emit(table.residual);
  emit(table.total);
}

void write_table_text(const AnovaTable& table, std::ostream& out) {
  std::size_t width = 8;
  for (const auto& r : table.terms) width = std::max(width, r.term.size());
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %12s %9s %6s %12s %10s %8s\n", static_cast<int>(width), "",
                "SS", "%SS", "df", "MS", "F", "p-value");
  out << buf;
  auto emit = [&](const AnovaRow& r) {
    const std::string f = r.f ? format_number(*r.f).substr(0, 10) : "--";
    std::string p = "--";
    if (r.p) {
      char pb[32];
      std::snprintf(pb, sizeof pb, "%.4f", *r.p);
      p = pb;
    }
    std::snprintf(buf, sizeof buf, "%-*s %12.4g %9.2f %6d %12.4g %10s %8s\n",
                  static_cast<int>(width), r.term.c_str(), r.ss, r.pct_ss, r.df, r.ms, f.c_str(),
                  p.c_str());
    out << buf;
  };
  for (const auto& r : table.terms) emit(r);
  emit(table.residual);
  out << std::string(width + 66, '-') << '\n';
  emit(table.total);
  for (const auto& w : table.warnings) out << "warning: " << w << '\n';
}

std::vector<AnovaRow> read_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "term,SS,%SS,df,MS,F,p") {
    throw Error(ErrorCode::ParseError, "unexpected ANOVA table header");
  }
  std::vector<AnovaRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 7) throw Error(ErrorCode::ParseError, "bad table row '" + line + "'");
    AnovaRow r;
    r.term = fields[0];
    r.ss = parse_number(fields[1]);
    r.pct_ss = parse_number(fields[2]);
    r.df = std::stoi(fields[3]);
    r.ms = parse_number(fields[4]);
    if (!fields[5].empty()) r.f = parse_number(fields[5]);
    if (!fields[6].empty()) r.p = parse_number(fields[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace asca
