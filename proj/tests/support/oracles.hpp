#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gfanm/nnls.hpp"
#include "gfanm/types.hpp"

namespace oracle {

using gfanm::Complex;
using gfanm::CMatrix;
using gfanm::CVector;
using gfanm::RMatrix;
using gfanm::RVector;

inline CMatrix random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  }
  return 0.5 * (m + m.adjoint());
}

/// Frobenius-nearest Hermitian Toeplitz matrix: the mean of each diagonal.
inline CMatrix diagonal_average(const CMatrix& m) {
  const auto n = m.rows();
  CMatrix out(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Complex mean = 0.0;
    for (Eigen::Index i = 0; i + k < n; ++i) mean += m(i, i + k);
    mean /= static_cast<double>(n - k);
    if (k == 0) mean = mean.real();
    for (Eigen::Index i = 0; i + k < n; ++i) {
      out(i, i + k) = mean;
      out(i + k, i) = std::conj(mean);
    }
  }
  return out;
}

inline double spectral_norm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Delay-bank atom (e^{-i theta}, ..., e^{-i n theta}).
inline CVector delay_atom(double theta, int n) {
  CVector g(n);
  for (int k = 0; k < n; ++k) g(k) = std::polar(1.0, -theta * (k + 1));
  return g;
}

/// Frequencies of a delay-bank covariance from polynomial roots: with P
/// the projector onto the n - r weakest eigenvectors, the unit-circle
/// roots of z^{n-1} sum_{k,l} P_{kl} z^{k-l} are double roots at the
/// line frequencies. Returns the angles of the 2r roots nearest the circle.
inline std::vector<double> toeplitz_root_angles(const CMatrix& sigma, int r) {
  const int n = static_cast<int>(sigma.rows());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (sigma + sigma.adjoint()));
  const CMatrix u = es.eigenvectors().leftCols(n - r);
  const CMatrix p = u * u.adjoint();
  const int deg = 2 * n - 2;
  CVector coef = CVector::Zero(deg + 1);  // coef(j) multiplies z^j
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) coef(k - l + n - 1) += p(k, l);
  }
  CMatrix companion = CMatrix::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coef(i) / coef(deg);
  Eigen::ComplexEigenSolver<CMatrix> roots(companion, false);
  std::vector<Complex> z(roots.eigenvalues().data(), roots.eigenvalues().data() + deg);
  std::sort(z.begin(), z.end(), [](Complex a, Complex b) {
    return std::abs(std::abs(a) - 1.0) < std::abs(std::abs(b) - 1.0);
  });
  std::vector<double> angles;
  for (int i = 0; i < 2 * r && i < deg; ++i) angles.push_back(gfanm::wrap_angle(std::arg(z[i])));
  return angles;
}

/// Exhaustive NNLS over all supports; feasible for up to ~12 columns.
inline RVector nnls_enumerate(const RMatrix& a, const RVector& b) {
  const auto cols = a.cols();
  RVector best = RVector::Zero(cols);
  double best_res = b.norm();
  for (long mask = 1; mask < (1L << cols); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (mask & (1L << j)) idx.push_back(j);
    }
    RMatrix sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const RVector xs = sub.colPivHouseholderQr().solve(b);
    if ((xs.array() < 0.0).any()) continue;
    const double res = (sub * xs - b).norm();
    if (res < best_res - 1e-14) {
      best_res = res;
      best.setZero();
      for (std::size_t k = 0; k < idx.size(); ++k) best(idx[k]) = xs(static_cast<Eigen::Index>(k));
    }
  }
  return best;
}

/// Upper bound on the weighted atomic norm inf { sum |c_k| ||G(theta_k)|| }
/// of s for the delay bank of size n = s.size(). Atoms sit on a uniform
/// grid of `grid` frequencies with `phases` discrete phases each; weights
/// come from nonnegative least squares with a small sum penalty, then the
/// fit residual is expanded exactly in the orthogonal DFT atoms so the
/// bound is valid for s itself.
inline double atomic_norm_upper_bound(const CVector& s, int grid = 2048, int phases = 8) {
  const int n = static_cast<int>(s.size());
  const double atom_norm = std::sqrt(static_cast<double>(n));
  const int cols = grid * phases;
  std::vector<CVector> atoms(static_cast<std::size_t>(grid));
  for (int j = 0; j < grid; ++j) atoms[static_cast<std::size_t>(j)] = delay_atom(gfanm::kTwoPi * j / grid, n);

  auto dft_cost = [&](const CVector& r) {
    double cost = 0.0;
    for (int k = 0; k < n; ++k) {
      const CVector g = delay_atom(gfanm::kTwoPi * k / n, n);
      cost += std::abs(g.dot(r)) / n * atom_norm;
    }
    return cost;
  };

  double best = dft_cost(s);
  for (double gamma : {0.0, 1e-4, 1e-3, 1e-2, 1e-1}) {
    RMatrix a(2 * n + 1, cols);
    for (int j = 0; j < grid; ++j) {
      for (int q = 0; q < phases; ++q) {
        const CVector col = std::polar(1.0, gfanm::kTwoPi * q / phases) * atoms[static_cast<std::size_t>(j)];
        const int c = j * phases + q;
        a.block(0, c, n, 1) = col.real();
        a.block(n, c, n, 1) = col.imag();
        a(2 * n, c) = std::sqrt(gamma) * atom_norm;
      }
    }
    RVector b = RVector::Zero(2 * n + 1);
    b.head(n) = s.real();
    b.segment(n, n) = s.imag();
    const RVector w = gfanm::nnls(a, b).x;

    CVector fit = CVector::Zero(n);
    double cost = 0.0;
    for (int j = 0; j < grid; ++j) {
      Complex c = 0.0;
      for (int q = 0; q < phases; ++q) c += w(j * phases + q) * std::polar(1.0, gfanm::kTwoPi * q / phases);
      if (c == 0.0) continue;
      fit += c * atoms[static_cast<std::size_t>(j)];
      cost += std::abs(c) * atom_norm;
    }
    best = std::min(best, cost + dft_cost(s - fit));
  }
  return best;
}

/// Sorted frequencies in [lo, hi] with pairwise gaps of at least sep.
inline std::vector<double> separated_freqs(int m, double lo, double hi, double sep,
                                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(lo, hi);
  for (;;) {
    std::vector<double> f(static_cast<std::size_t>(m));
    for (double& v : f) v = ud(rng);
    std::sort(f.begin(), f.end());
    bool ok = true;
    for (std::size_t k = 1; k < f.size(); ++k) ok = ok && f[k] - f[k - 1] >= sep;
    if (ok) return f;
  }
}

}  // namespace oracle
