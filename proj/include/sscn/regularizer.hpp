#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sscn/linalg.hpp"
#include "sscn/sketch.hpp"

namespace sscn {

// psi(x) = sum_j psi_j(x_j). Only coordinate-separable kinds exist.
enum class RegularizerKind { none, squared_l2, l1 };

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;

  static RegularizerSpec none() { return {}; }
  static RegularizerSpec squared_l2(double lambda) { return {RegularizerKind::squared_l2, lambda}; }
  static RegularizerSpec l1(double lambda) { return {RegularizerKind::l1, lambda}; }

  double coordinate_value(double xj) const;
  double value(const Vector& x) const;
};

std::string_view to_string(RegularizerKind kind);
// Accepts "none", "squared_l2", "l1"; anything else is UnsupportedFeature
// (non-separable regularizers are not handled by subspace steps).
RegularizerKind parse_regularizer_kind(std::string_view name);

/// psi restricted to the sampled coordinates: h_j -> psi_j(x_j + h_j).
struct PsiSlice {
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;
  std::vector<double> base;  // x_j for j in S, sketch order

  bool smooth() const { return kind != RegularizerKind::l1; }
  double value(const Vector& h) const;       // sum_j psi_j(x_j + h_j)
  double value_at_zero() const;              // sum_j psi_j(x_j)
  double coordinate_value(std::size_t slot, double h) const;
};

PsiSlice psi_slice(const RegularizerSpec& reg, const Vector& x, const SketchSample& sketch);

}  // namespace sscn
