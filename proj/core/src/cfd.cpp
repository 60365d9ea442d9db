#include "gfanm/cfd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfanm/nnls.hpp"
#include "gfanm/structcov.hpp"

namespace gfanm {

int numerical_rank(std::span<const double> eigs, const RankRule& rule) {
  if (eigs.empty()) throw Error(Errc::invalid_input, "numerical_rank: no eigenvalues");
  auto at = [&](std::size_t k) { return std::max(eigs[k], 0.0); };
  if (at(0) < rule.abs_floor) return 0;
  const std::size_t n = eigs.size();
  for (std::size_t k = 1; k < n; ++k) {
    const double cur = at(k - 1);
    const double next = at(k);
    if (next < rule.abs_floor || cur > rule.ratio_gap * next) return static_cast<int>(k);
  }
  return static_cast<int>(n);
}

double dbar_at(const GFilter& filter, const CMatrix& noise_basis, double theta) {
  if (noise_basis.cols() == 0) return 0.0;
  const CVector g = transfer(filter, theta);
  const double num = (noise_basis.adjoint() * g).squaredNorm();
  return std::clamp(num / g.squaredNorm(), 0.0, 1.0);
}

std::vector<CurvePoint> dbar_curve(const GFilter& filter, const CMatrix& noise_basis,
                                   int grid_size) {
  if (grid_size < 4) throw Error(Errc::invalid_input, "dbar grid needs at least 4 points");
  if (noise_basis.cols() > 0 && noise_basis.rows() != filter.size()) {
    throw Error(Errc::shape_mismatch, "noise basis rows must equal filter size");
  }
  std::vector<CurvePoint> curve(grid_size);
  for (int j = 0; j < grid_size; ++j) {
    const double theta = kTwoPi * j / grid_size;
    curve[j] = {theta, dbar_at(filter, noise_basis, theta)};
  }
  return curve;
}

ExtractionDeficit::ExtractionDeficit(LineEstimate partial, int requested)
    : Error(Errc::extraction_deficit,
            "found " + std::to_string(partial.freqs.size()) + " local minima of dbar, need " +
                std::to_string(requested)),
      partial_(std::move(partial)),
      requested_(requested) {}

namespace {

template <typename F>
double golden_section(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> fit_powers(const GFilter& filter, const CMatrix& sigma,
                               std::span<const double> freqs) {
  if (freqs.empty()) return {};
  const Eigen::Index n = filter.size();
  RMatrix design(n * n, static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const CVector g = transfer(filter, freqs[k]);
    design.col(static_cast<Eigen::Index>(k)) = hermitian_to_coords(g * g.adjoint());
  }
  const RVector x = nnls(design, hermitian_to_coords(sigma)).x;
  return {x.data(), x.data() + x.size()};
}

LineEstimate cf_decompose(const GFilter& filter, const CMatrix& sigma, const CfOptions& options) {
  const int n = filter.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw Error(Errc::shape_mismatch, "Sigma must match the filter size");
  }
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if (hermitian_defect(sigma) > 1e-8 * scale) {
    throw Error(Errc::invalid_input, "Sigma is not Hermitian");
  }
  const CMatrix sym = 0.5 * (sigma + sigma.adjoint());

  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  // Eigen sorts ascending; flip to descending
  const RVector eigs = es.eigenvalues().reverse();
  const CMatrix vecs = es.eigenvectors().rowwise().reverse();

  LineEstimate est;
  est.eigenvalues = eigs;
  int rank = numerical_rank(std::span<const double>(eigs.data(), eigs.size()), options.rule);
  if (rank >= n) {
    rank = n - 1;
    est.rank_clamped = true;
  }

  const CMatrix noise = vecs.rightCols(n - rank);
  std::vector<CurvePoint> curve = dbar_curve(filter, noise, options.grid_size);
  if (rank == 0) {
    if (options.keep_curve) est.dbar = std::move(curve);
    return est;
  }

  const int m = options.grid_size;
  const double step = kTwoPi / m;
  std::vector<CurvePoint> minima;
  for (int j = 0; j < m; ++j) {
    const double prev = curve[(j + m - 1) % m].value;
    const double next = curve[(j + 1) % m].value;
    const double cur = curve[j].value;
    if (cur < prev && cur < next) {
      const double center = curve[j].theta;
      auto f = [&](double t) { return dbar_at(filter, noise, t); };
      const double t = golden_section(f, center - step, center + step, options.refine_tol);
      minima.push_back({wrap_angle(t), f(t)});
    }
  }
  std::sort(minima.begin(), minima.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.value < b.value; });
  if (static_cast<int>(minima.size()) > rank) minima.resize(rank);
  std::sort(minima.begin(), minima.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.theta < b.theta; });

  for (const CurvePoint& p : minima) est.freqs.push_back(p.theta);
  est.powers = fit_powers(filter, sym, est.freqs);
  if (options.keep_curve) est.dbar = std::move(curve);

  if (static_cast<int>(minima.size()) < rank) {
    est.rank = static_cast<int>(minima.size());
    throw ExtractionDeficit(std::move(est), rank);
  }
  est.rank = rank;
  return est;
}

}  // namespace gfanm
