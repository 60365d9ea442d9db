#pragma once

#include "gfanm/types.hpp"

namespace gfanm {

struct NnlsResult {
  RVector x;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set).
NnlsResult nnls(const RMatrix& a, const RVector& b, int max_iter = 0);

}  // namespace gfanm
