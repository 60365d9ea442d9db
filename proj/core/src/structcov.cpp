#include "gfanm/structcov.hpp"

#include <cmath>
#include <numbers>

namespace gfanm {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void check_square(const CMatrix& m, int n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw Error(Errc::shape_mismatch, std::string(what) + " must be " + std::to_string(n) +
                                          "x" + std::to_string(n));
  }
}

}  // namespace

RVector hermitian_to_coords(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  RVector v(n * n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) v(k++) = m(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex c = 0.5 * (m(i, j) + std::conj(m(j, i)));
      v(k++) = kSqrt2 * c.real();
      v(k++) = kSqrt2 * c.imag();
    }
  }
  return v;
}

CMatrix coords_to_hermitian(const RVector& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * n) {
    throw Error(Errc::shape_mismatch, "coordinate vector has wrong length");
  }
  CMatrix m(n, n);
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) m(i, i) = v(k++);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Complex c(v(k) / kSqrt2, v(k + 1) / kSqrt2);
      k += 2;
      m(i, j) = c;
      m(j, i) = std::conj(c);
    }
  }
  return m;
}

double hermitian_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(Errc::shape_mismatch, "matrix must be square");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix constraint_residual(const GFilter& filter, const CMatrix& sigma) {
  const int n = filter.size();
  check_square(sigma, n, "Sigma");
  const CMatrix sym = 0.5 * (sigma + sigma.adjoint());
  const CVector& b = filter.b();
  CMatrix compl_proj = CMatrix::Identity(n, n) - (b * b.adjoint()) / b.squaredNorm();
  const CMatrix displaced = sym - filter.A() * sym * filter.A().adjoint();
  return compl_proj * displaced * compl_proj;
}

StructuredSubspace::StructuredSubspace(GFilter filter, RMatrix basis)
    : filter_(std::move(filter)), basis_(std::move(basis)) {
  const Eigen::Index n = filter_.size();
  if (basis_.rows() != n * n) {
    throw Error(Errc::shape_mismatch, "basis rows must equal n^2");
  }
}

StructuredSubspace StructuredSubspace::toeplitz(int n) {
  GFilter delay = make_allpass_cascade(Complex(0.0, 0.0), n);
  const int d = 2 * n - 1;
  RMatrix basis = RMatrix::Zero(static_cast<Eigen::Index>(n) * n, d);
  // column 0: identity; then per offset k the real and imaginary patterns
  for (int i = 0; i < n; ++i) basis(i, 0) = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::Index k = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int offset = j - i;
      // matrix with ones on both +-offset diagonals has squared norm 2(n-offset);
      // its coordinate is sqrt(2) per strictly-upper entry
      const double scale = kSqrt2 / std::sqrt(2.0 * (n - offset));
      basis(k, 2 * offset - 1) = scale;
      basis(k + 1, 2 * offset) = scale;
      k += 2;
    }
  }
  return StructuredSubspace(std::move(delay), std::move(basis));
}

CMatrix StructuredSubspace::element(int i) const {
  return coords_to_hermitian(basis_.col(i), n());
}

RVector StructuredSubspace::coordinates(const CMatrix& m) const {
  check_square(m, n(), "matrix");
  return basis_.transpose() * hermitian_to_coords(m);
}

CMatrix StructuredSubspace::synthesize(const RVector& coords) const {
  if (coords.size() != dim()) throw Error(Errc::shape_mismatch, "coordinate count mismatch");
  return coords_to_hermitian(basis_ * coords, n());
}

CMatrix StructuredSubspace::project(const CMatrix& m) const {
  return synthesize(coordinates(m));
}

StructuredSubspace subspace_basis(const GFilter& filter) {
  const int n = filter.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;
  RMatrix op(dim, dim);
  RVector unit = RVector::Zero(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    unit(k) = 1.0;
    op.col(k) = hermitian_to_coords(constraint_residual(filter, coords_to_hermitian(unit, n)));
    unit(k) = 0.0;
  }
  Eigen::BDCSVD<RMatrix> svd(op, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double cutoff = 1e-9 * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  RMatrix basis = svd.matrixV().rightCols(dim - rank);
  return StructuredSubspace(filter, std::move(basis));
}

CMatrix project_structured(const StructuredSubspace& sub, const CMatrix& m) {
  return sub.project(m);
}

}  // namespace gfanm
