#include "gfanm/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gfanm {

namespace {

RVector solve_passive(const RMatrix& a, const RVector& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (passive[j]) cols.push_back(j);
  }
  RVector z = RVector::Zero(a.cols());
  if (cols.empty()) return z;
  RMatrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(k) = a.col(cols[k]);
  const RVector zs = sub.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zs(k);
  return z;
}

}  // namespace

NnlsResult nnls(const RMatrix& a, const RVector& b, int max_iter) {
  if (a.rows() != b.size()) throw Error(Errc::shape_mismatch, "nnls: rows of A must match b");
  const Eigen::Index n = a.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * n + 10);

  NnlsResult res;
  res.x = RVector::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1.0, a.cwiseAbs().colwise().sum().maxCoeff()) *
                     std::max<double>(1.0, static_cast<double>(std::max(a.rows(), n)));

  RVector w = a.transpose() * (b - a * res.x);
  int outer = 0;
  while (outer < max_iter) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    ++outer;

    for (int inner = 0; inner <= n; ++inner) {
      RVector z = solve_passive(a, b, passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && z(j) <= 0.0) feasible = false;
      }
      if (feasible) {
        res.x = z;
        break;
      }
      // step back toward the feasible region until a passive entry hits zero
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double denom = res.x(j) - z(j);
        if (passive[j] && z(j) <= 0.0 && denom > 0.0) {
          alpha = std::min(alpha, res.x(j) / denom);
        }
      }
      if (std::isfinite(alpha)) res.x += alpha * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && res.x(j) <= tol) {
          passive[j] = false;
          res.x(j) = 0.0;
        }
      }
    }
    w = a.transpose() * (b - a * res.x);
  }
  res.iterations = outer;
  res.residual_norm = (a * res.x - b).norm();
  return res;
}

}  // namespace gfanm
