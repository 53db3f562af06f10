#include "sscn/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sscn/error.hpp"

namespace sscn {

DataMatrix DataMatrix::from_triplets(Index rows, Index cols,
                                     const std::vector<Eigen::Triplet<double>>& entries) {
  const double cells = static_cast<double>(rows) * static_cast<double>(cols);
  if (cells > 0 && static_cast<double>(entries.size()) > 0.25 * cells) {
    Matrix dense = Matrix::Zero(rows, cols);
    for (const auto& t : entries) dense(t.row(), t.col()) += t.value();
    return DataMatrix(std::move(dense));
  }
  SparseMatrix sp(rows, cols);
  sp.setFromTriplets(entries.begin(), entries.end());
  sp.makeCompressed();
  return DataMatrix(std::move(sp));
}

Index DataMatrix::rows() const {
  return std::visit([](const auto& m) { return static_cast<Index>(m.rows()); }, storage_);
}

Index DataMatrix::cols() const {
  return std::visit([](const auto& m) { return static_cast<Index>(m.cols()); }, storage_);
}

double DataMatrix::density() const {
  const double cells = static_cast<double>(rows()) * static_cast<double>(cols());
  if (cells == 0) return 0.0;
  if (auto* dense = std::get_if<Matrix>(&storage_)) {
    return static_cast<double>((dense->array() != 0.0).count()) / cells;
  }
  return static_cast<double>(std::get<SparseMatrix>(storage_).nonZeros()) / cells;
}

Matrix DataMatrix::gather_columns(const std::vector<Index>& cols) const {
  const Index n = rows();
  Matrix out(n, static_cast<Index>(cols.size()));
  if (auto* dense = std::get_if<Matrix>(&storage_)) {
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = dense->col(cols[k]);
    return out;
  }
  const auto& sp = std::get<SparseMatrix>(storage_);
  out.setZero();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (SparseMatrix::InnerIterator it(sp, cols[k]); it; ++it) out(it.row(), static_cast<Index>(k)) = it.value();
  }
  return out;
}

Vector DataMatrix::times(const Vector& x) const {
  return std::visit([&](const auto& m) -> Vector { return m * x; }, storage_);
}

Vector DataMatrix::transpose_times(const Vector& u) const {
  return std::visit([&](const auto& m) -> Vector { return m.transpose() * u; }, storage_);
}

Matrix DataMatrix::gram() const {
  if (auto* dense = std::get_if<Matrix>(&storage_)) return dense->transpose() * (*dense);
  const auto& sp = std::get<SparseMatrix>(storage_);
  return Matrix(SparseMatrix(sp.transpose() * sp));
}

Vector DataMatrix::column_norms() const {
  if (auto* dense = std::get_if<Matrix>(&storage_)) return dense->colwise().norm().transpose();
  const auto& sp = std::get<SparseMatrix>(storage_);
  Vector norms(sp.cols());
  for (Index j = 0; j < sp.cols(); ++j) norms[j] = sp.col(j).norm();
  return norms;
}

Matrix DataMatrix::to_dense() const {
  if (auto* dense = std::get_if<Matrix>(&storage_)) return *dense;
  return Matrix(std::get<SparseMatrix>(storage_));
}

void DataMatrix::scale_columns(const Vector& factors) {
  if (auto* dense = std::get_if<Matrix>(&storage_)) {
    *dense = (*dense) * factors.asDiagonal();
    return;
  }
  auto& sp = std::get<SparseMatrix>(storage_);
  for (Index j = 0; j < sp.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(sp, j); it; ++it) it.valueRef() *= factors[j];
}

DataMatrix DataMatrix::drop_columns(const std::vector<Index>& dropped) const {
  if (dropped.empty()) return *this;
  std::vector<Index> remap(static_cast<std::size_t>(cols()), -1);
  Index next = 0;
  std::size_t di = 0;
  for (Index j = 0; j < cols(); ++j) {
    if (di < dropped.size() && dropped[di] == j) {
      ++di;
      continue;
    }
    remap[static_cast<std::size_t>(j)] = next++;
  }
  std::vector<Eigen::Triplet<double>> entries;
  for_each_nonzero([&](Index i, Index j, double v) {
    const Index nj = remap[static_cast<std::size_t>(j)];
    if (nj >= 0) entries.emplace_back(i, nj, v);
  });
  if (is_dense()) {
    Matrix dense = Matrix::Zero(rows(), next);
    for (const auto& t : entries) dense(t.row(), t.col()) = t.value();
    return DataMatrix(std::move(dense));
  }
  SparseMatrix sp(rows(), next);
  sp.setFromTriplets(entries.begin(), entries.end());
  sp.makeCompressed();
  return DataMatrix(std::move(sp));
}

namespace {

double parse_double(std::string_view tok, std::size_t line, const char* what) {
  double v = 0.0;
  // from_chars rejects a leading '+', which LIBSVM files use for labels
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite ") + what);
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, LabelMode mode, Index min_features) {
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> labels;
  Index max_feature = 0;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream tokens{std::string(line)};
    std::string tok;
    if (!(tokens >> tok)) continue;

    double label = parse_double(tok, line_no, "label");
    if (mode == LabelMode::binary) {
      if (label == 1.0) {
        label = 1.0;
      } else if (label == -1.0 || label == 0.0) {
        label = -1.0;
      } else {
        throw ParseError(line_no, "label " + tok + " is not binary (expected -1/+1 or 0/1)");
      }
    }
    const auto row = static_cast<Index>(labels.size());
    labels.push_back(label);

    Index prev = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError(line_no, "malformed feature token '" + tok + "'");
      }
      Index idx = 0;
      std::string_view idx_str(tok.data(), colon);
      auto [ptr, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
      if (ec != std::errc() || ptr != idx_str.data() + idx_str.size() || idx < 1) {
        throw ParseError(line_no, "malformed feature index '" + std::string(idx_str) + "'");
      }
      if (idx <= prev) {
        throw ParseError(line_no, "feature indices must be strictly ascending (" + std::to_string(idx) +
                                      " after " + std::to_string(prev) + ")");
      }
      prev = idx;
      const double value = parse_double(std::string_view(tok).substr(colon + 1), line_no, "feature value");
      max_feature = std::max(max_feature, idx);
      if (value != 0.0) entries.emplace_back(row, idx - 1, value);
    }
  }

  Dataset ds;
  const auto n = static_cast<Index>(labels.size());
  const Index d = std::max(max_feature, min_features);
  ds.A = DataMatrix::from_triplets(n, d, entries);
  ds.b = Eigen::Map<const Vector>(labels.data(), n);
  return ds;
}

Dataset load_libsvm(const std::string& path, LabelMode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return parse_libsvm(in, mode);
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_libsvm(std::ostream& out, const Dataset& ds) {
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(ds.n()));
  ds.A.for_each_nonzero([&](Index i, Index j, double v) { rows[static_cast<std::size_t>(i)].emplace_back(j, v); });
  for (Index i = 0; i < ds.n(); ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end());
    put_double(out, ds.b[i]);
    for (auto [j, v] : row) {
      out << ' ' << (j + 1) << ':';
      put_double(out, v);
    }
    out << '\n';
  }
}

Dataset normalize_columns(const Dataset& ds) {
  Dataset out = ds;
  const Vector norms = ds.A.column_norms();
  std::vector<Index> empty;
  for (Index j = 0; j < norms.size(); ++j) {
    if (norms[j] == 0.0) empty.push_back(j);
  }
  Vector factors(norms.size());
  for (Index j = 0; j < norms.size(); ++j) factors[j] = norms[j] > 0.0 ? 1.0 / norms[j] : 0.0;
  out.A.scale_columns(factors);
  if (!empty.empty()) {
    out.A = out.A.drop_columns(empty);
    out.warnings.push_back("normalize_columns: dropped " + std::to_string(empty.size()) + " all-zero column(s)");
    out.dropped_columns.insert(out.dropped_columns.end(), empty.begin(), empty.end());
  }
  out.normalized = true;
  return out;
}

}  // namespace sscn
