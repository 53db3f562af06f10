#include "sscn/regularizer.hpp"

#include <cmath>
#include <string>

#include "sscn/error.hpp"

namespace sscn {
namespace {

double psi_coordinate(RegularizerKind kind, double lambda, double v) {
  switch (kind) {
    case RegularizerKind::none:
      return 0.0;
    case RegularizerKind::squared_l2:
      return 0.5 * lambda * v * v;
    case RegularizerKind::l1:
      return lambda * std::abs(v);
  }
  return 0.0;
}

}  // namespace

double RegularizerSpec::coordinate_value(double xj) const { return psi_coordinate(kind, lambda, xj); }

double RegularizerSpec::value(const Vector& x) const {
  switch (kind) {
    case RegularizerKind::none:
      return 0.0;
    case RegularizerKind::squared_l2:
      return 0.5 * lambda * x.squaredNorm();
    case RegularizerKind::l1:
      return lambda * x.lpNorm<1>();
  }
  return 0.0;
}

std::string_view to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::none:
      return "none";
    case RegularizerKind::squared_l2:
      return "squared_l2";
    case RegularizerKind::l1:
      return "l1";
  }
  return "?";
}

RegularizerKind parse_regularizer_kind(std::string_view name) {
  if (name == "none") return RegularizerKind::none;
  if (name == "squared_l2") return RegularizerKind::squared_l2;
  if (name == "l1") return RegularizerKind::l1;
  throw UnsupportedFeature("regularizer '" + std::string(name) +
                           "' is not coordinate-separable or not implemented");
}

double PsiSlice::coordinate_value(std::size_t slot, double h) const {
  return psi_coordinate(kind, lambda, base[slot] + h);
}

double PsiSlice::value(const Vector& h) const {
  if (kind == RegularizerKind::none) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) total += coordinate_value(i, h[static_cast<Index>(i)]);
  return total;
}

double PsiSlice::value_at_zero() const {
  double total = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) total += psi_coordinate(kind, lambda, base[i]);
  return total;
}

PsiSlice psi_slice(const RegularizerSpec& reg, const Vector& x, const SketchSample& sketch) {
  if (reg.lambda < 0.0) throw ConfigError("regularizer.lambda must be nonnegative");
  PsiSlice slice;
  slice.kind = reg.kind;
  slice.lambda = reg.lambda;
  if (reg.kind == RegularizerKind::none) return slice;
  slice.base.reserve(sketch.indices.size());
  for (Index j : sketch.indices) {
    if (j < 0 || j >= x.size()) throw ContractViolation("psi_slice: sketch index out of range");
    slice.base.push_back(x[j]);
  }
  return slice;
}

}  // namespace sscn
