#pragma once

#include <memory>

#include "gfanm/gfilter.hpp"

namespace gfanm {

/// Real coordinates of a Hermitian n x n matrix: the n diagonal entries,
/// then sqrt(2)*Re and sqrt(2)*Im of each strictly-upper entry (row-major).
/// Under this map Re trace(X Y*) is the Euclidean inner product.
RVector hermitian_to_coords(const CMatrix& m);
CMatrix coords_to_hermitian(const RVector& v, int n);

/// Largest entrywise deviation from Hermitian symmetry.
double hermitian_defect(const CMatrix& m);

/// (I - Pi_b)(Sigma - A Sigma A*)(I - Pi_b) with Pi_b = b b* / (b* b).
CMatrix constraint_residual(const GFilter& filter, const CMatrix& sigma);

/// Orthonormal basis (trace inner product) of the Hermitian matrices that
/// satisfy the structural constraint of a filter. Immutable once built.
class StructuredSubspace {
 public:
  StructuredSubspace(GFilter filter, RMatrix basis);

  /// Hermitian Toeplitz matrices, built in closed form; this is the
  /// subspace of the delay bank make_allpass_cascade(0, n).
  static StructuredSubspace toeplitz(int n);

  const GFilter& filter() const noexcept { return filter_; }
  int n() const noexcept { return filter_.size(); }
  int dim() const noexcept { return static_cast<int>(basis_.cols()); }

  /// n^2 x dim matrix of orthonormal columns in Hermitian coordinates.
  const RMatrix& basis() const noexcept { return basis_; }
  CMatrix element(int i) const;

  /// Coordinates of the orthogonal projection of m.
  RVector coordinates(const CMatrix& m) const;
  CMatrix synthesize(const RVector& coords) const;
  CMatrix project(const CMatrix& m) const;

 private:
  GFilter filter_;
  RMatrix basis_;
};

/// Nullspace of Sigma -> constraint_residual(filter, Sigma) over the real
/// vector space of Hermitian matrices, via SVD with a 1e-9 relative cutoff.
StructuredSubspace subspace_basis(const GFilter& filter);

CMatrix project_structured(const StructuredSubspace& sub, const CMatrix& m);

}  // namespace gfanm
