#include "gfanm/gfilter.hpp"

#include <cmath>
#include <string>

namespace gfanm {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_pole: return "invalid-pole";
    case Errc::invalid_size: return "invalid-size";
    case Errc::invalid_band: return "invalid-band";
    case Errc::design_infeasible: return "design-infeasible";
    case Errc::invalid_signal: return "invalid-signal";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::invalid_input: return "invalid-input";
    case Errc::extraction_deficit: return "extraction-deficit";
    case Errc::ill_posed: return "ill-posed";
    case Errc::estimation_infeasible: return "estimation-infeasible";
  }
  return "unknown";
}

GFilter::GFilter(CMatrix a, CVector b, std::optional<Complex> pole, bool lower)
    : a_(std::move(a)), b_(std::move(b)), pole_(pole), lower_triangular_(lower) {}

GFilter GFilter::from_pair(CMatrix a, CVector b) {
  const Eigen::Index n = b.size();
  if (n == 0) throw Error(Errc::invalid_size, "filter size must be positive");
  if (a.rows() != n || a.cols() != n) {
    throw Error(Errc::shape_mismatch, "A must be square with the same size as b");
  }
  const bool lower = a.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0);
  double radius = 0.0;
  if (lower) {
    radius = a.diagonal().cwiseAbs().maxCoeff();
  } else {
    Eigen::ComplexEigenSolver<CMatrix> es(a, false);
    radius = es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if (!(radius < 1.0)) {
    throw Error(Errc::invalid_pole,
                "spectral radius of A is " + std::to_string(radius) + ", must be < 1");
  }
  GFilter filter(std::move(a), std::move(b), std::nullopt, lower);
  // rank of the controllability matrix equals rank of the Gramian
  Eigen::SelfAdjointEigenSolver<CMatrix> gram(controllability_gramian(filter),
                                             Eigen::EigenvaluesOnly);
  const RVector& ev = gram.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(ev.size() - 1))) {
    throw Error(Errc::invalid_input, "(A, b) is not a reachable pair");
  }
  return filter;
}

GFilter make_allpass_cascade(Complex pole, int n) {
  if (!(std::abs(pole) < 1.0)) {
    throw Error(Errc::invalid_pole, "pole must lie strictly inside the unit disc");
  }
  if (n < 1) throw Error(Errc::invalid_size, "filter size must be >= 1");

  const double eta2 = 1.0 - std::norm(pole);
  const double eta = std::sqrt(eta2);
  const Complex q = -std::conj(pole);

  // powers[k] = (-conj(p))^k
  std::vector<Complex> powers(n, Complex(1.0, 0.0));
  for (int k = 1; k < n; ++k) powers[k] = powers[k - 1] * q;

  CMatrix a = CMatrix::Zero(n, n);
  CVector b(n);
  for (int j = 0; j < n; ++j) {
    a(j, j) = pole;
    b(j) = eta * powers[j];
    for (int k = 0; k < j; ++k) a(j, k) = eta2 * powers[j - k - 1];
  }
  return GFilter(std::move(a), std::move(b), pole, true);
}

GFilter design_band_filter(double theta_lo, double theta_hi, int n) {
  if (!(theta_lo >= 0.0 && theta_lo < theta_hi && theta_hi < kTwoPi)) {
    throw Error(Errc::invalid_band, "band must satisfy 0 <= lo < hi < 2*pi");
  }
  if (n < 1) throw Error(Errc::invalid_size, "filter size must be >= 1");

  const double center = 0.5 * (theta_lo + theta_hi);
  // every section has the same magnitude response, so one section decides
  auto excess = [&](double radius) {
    GFilter section = make_allpass_cascade(std::polar(radius, center), 1);
    return gain(section, theta_lo) / gain(section, center) - 0.5;
  };

  double lo = 1e-6;
  double hi = 1.0 - 1e-6;
  double f_lo = excess(lo);
  double f_hi = excess(hi);
  if (!(f_lo >= 0.0 && f_hi <= 0.0)) {
    throw Error(Errc::design_infeasible, "no pole radius meets the half-power condition");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return make_allpass_cascade(std::polar(0.5 * (lo + hi), center), n);
}

CVector transfer(const GFilter& filter, double theta) {
  const Complex z = std::polar(1.0, theta);
  CMatrix m = -filter.A();
  m.diagonal().array() += z;
  if (filter.lower_triangular()) {
    return m.triangularView<Eigen::Lower>().solve(filter.b());
  }
  return m.partialPivLu().solve(filter.b());
}

double gain(const GFilter& filter, double theta) {
  return transfer(filter, theta).squaredNorm();
}

int settle_length(const GFilter& filter, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_input, "eps must be positive");
  const int n = filter.size();
  CMatrix power = CMatrix::Identity(n, n);
  int k = 0;
  for (;;) {
    // ||P||_2 <= ||P||_F, so the SVD is only needed when the cheap bound fails
    if (power.norm() < eps) return k;
    Eigen::JacobiSVD<CMatrix> svd(power);
    if (svd.singularValues()(0) < eps) return k;
    power = power * filter.A();
    ++k;
  }
}

CMatrix controllability_gramian(const GFilter& filter) {
  // Smith doubling: P <- P + A_k P A_k*, A_k <- A_k^2
  CMatrix p = filter.b() * filter.b().adjoint();
  CMatrix ak = filter.A();
  for (int it = 0; it < 64; ++it) {
    p += ak * p * ak.adjoint();
    ak = (ak * ak).eval();
    if (ak.norm() < 1e-18) break;
  }
  return p;
}

CVector run_filter(const GFilter& filter, std::span<const Complex> y) {
  CVector x = CVector::Zero(filter.size());
  for (const Complex& sample : y) {
    if (filter.lower_triangular()) {
      x = (filter.A().triangularView<Eigen::Lower>() * x).eval();
    } else {
      x = (filter.A() * x).eval();
    }
    x += filter.b() * sample;
  }
  return x;
}

FilterOutput filter_signal(const GFilter& filter, std::span<const Complex> y, double eps) {
  if (y.empty()) throw Error(Errc::invalid_signal, "input signal is empty");
  FilterOutput out;
  out.x = run_filter(filter, y);
  out.settle_length = settle_length(filter, eps);
  out.discarded = static_cast<int>(y.size()) - 1;
  out.transient_warning = out.settle_length > out.discarded;
  return out;
}

}  // namespace gfanm
