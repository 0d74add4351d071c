#pragma once

#include "qmsd/types.hpp"

namespace qmsd {

/// Nodes and weights for the weight function exp(-t^2) on the real line,
/// so that  integral f(t) exp(-t^2) dt  ~=  sum_i weights[i] * f(nodes[i]).
struct GaussHermiteRule {
  RealVector nodes;
  RealVector weights;
};

/// Golub-Welsch construction: eigenvalues of the symmetric tridiagonal
/// Jacobi matrix give the nodes, the squared first eigenvector components
/// (scaled by sqrt(pi)) the weights. Exact for polynomials up to degree
/// 2*order - 1. Orders below 8 are rejected: the phase-space integrals this
/// rule feeds are not trustworthy below that.
GaussHermiteRule gauss_hermite(int order);

}  // namespace qmsd
