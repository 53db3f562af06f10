#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "sscn/linalg.hpp"

namespace sscn {

/// n x d data matrix, stored dense (column-major) or as compressed columns.
/// Coordinate methods touch whole columns: residual updates and subspace
/// derivatives both read A(:, S).
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix dense) : storage_(std::move(dense)) {}
  explicit DataMatrix(SparseMatrix sparse) : storage_(std::move(sparse)) {}

  // Chooses dense storage when more than 25% of entries are nonzero.
  static DataMatrix from_triplets(Index rows, Index cols,
                                  const std::vector<Eigen::Triplet<double>>& entries);

  Index rows() const;
  Index cols() const;
  bool is_dense() const { return std::holds_alternative<Matrix>(storage_); }
  double density() const;

  Matrix gather_columns(const std::vector<Index>& cols) const;  // n x |cols|
  Vector times(const Vector& x) const;                          // A x
  Vector transpose_times(const Vector& u) const;                // A^T u
  Matrix gram() const;                                          // A^T A
  Vector column_norms() const;
  Matrix to_dense() const;
  void scale_columns(const Vector& factors);
  DataMatrix drop_columns(const std::vector<Index>& dropped) const;

  template <class Fn>
  void for_each_nonzero(Fn&& fn) const {  // fn(row, col, value)
    if (auto* dense = std::get_if<Matrix>(&storage_)) {
      for (Index j = 0; j < dense->cols(); ++j)
        for (Index i = 0; i < dense->rows(); ++i)
          if ((*dense)(i, j) != 0.0) fn(i, j, (*dense)(i, j));
    } else {
      const auto& sp = std::get<SparseMatrix>(storage_);
      for (Index j = 0; j < sp.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(sp, j); it; ++it) fn(it.row(), it.col(), it.value());
    }
  }

 private:
  std::variant<Matrix, SparseMatrix> storage_;
};

struct Dataset {
  DataMatrix A;
  Vector b;
  bool normalized = false;
  std::vector<Index> dropped_columns;  // original indices removed by normalize_columns
  std::vector<std::string> warnings;

  Index n() const { return A.rows(); }
  Index d() const { return A.cols(); }
};

enum class LabelMode {
  binary,  // labels mapped to {-1,+1}; 0 -> -1; anything else rejected
  real,    // labels kept verbatim (log-sum-exp offsets b_i)
};

/// Reads "label idx:val idx:val ..." lines with 1-based strictly ascending
/// indices. Blank lines and '#' comments are skipped. `min_features` widens
/// the column count beyond the largest index seen (useful for test splits).
Dataset parse_libsvm(std::istream& in, LabelMode mode = LabelMode::binary, Index min_features = 0);
Dataset load_libsvm(const std::string& path, LabelMode mode = LabelMode::binary);

// Writes every nonzero with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& ds);

/// Scales each column to unit Euclidean norm. All-zero columns are removed
/// and recorded in `dropped_columns` with a warning.
Dataset normalize_columns(const Dataset& ds);

}  // namespace sscn
