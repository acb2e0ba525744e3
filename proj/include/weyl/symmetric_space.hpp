#pragma once

// Numerical geometry of the symmetric space SL(d,R)/SO(d) with base point
// the identity coset: vector-valued distances (sorted log singular values),
// translation vectors (sorted log eigenvalue moduli), full flags and their
// transversality, and chamber angles.
//
// Accuracy note. Small singular values of a badly scaled product matrix are
// not recoverable from its double-precision entries once they fall below
// eps * ||A||. All log-singular data here is therefore assembled from the
// largest singular value of each compound (exterior power) matrix, whose
// relative accuracy does not depend on the spread of the spectrum, and the
// last coordinate is closed with det = 1. Callers evaluating long products
// should build the compounds alongside the product letter by letter (see
// schottky.hpp) instead of taking minors of the finished product.

#include "weyl/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace weyl {

// Chamber-valued vector: coordinates sorted non-increasing, sum ~ 0.
struct WeylVector {
  Vec coords;

  int dim() const { return static_cast<int>(coords.size()); }
  double norm() const { return coords.norm(); }
  double min_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < coords.size(); ++i) g = std::min(g, coords(i) - coords(i + 1));
    return g;
  }
};

// Full flag in R^d stored as an orthonormal frame; the leading i columns
// span the i-dimensional member of the chain.
struct Flag {
  Mat frame;

  int dim() const { return static_cast<int>(frame.rows()); }
};

inline bool is_orthonormal(const Mat& frame, double tol) {
  Mat g = frame.transpose() * frame;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

// Turns partial log sums s_k = log(sigma_1...sigma_k), k = 1..d-1, into a
// chamber vector, closing the sum with log det = 0.
inline WeylVector from_partial_log_sums(const std::vector<double>& s) {
  const int d = static_cast<int>(s.size()) + 1;
  Vec h(d);
  double prev = 0.0;
  for (int k = 0; k < d - 1; ++k) {
    if (!std::isfinite(s[k])) throw NonFiniteResult("non-finite log singular data");
    h(k) = s[k] - prev;
    prev = s[k];
  }
  h(d - 1) = -prev;
  std::sort(h.data(), h.data() + d, std::greater<double>());
  return WeylVector{std::move(h)};
}

}  // namespace detail

// Cartan vector from the compound chain [A, A^(2), ..., A^(d-1)] where
// A^(k) is the k-th compound of A.
inline WeylVector cartan_from_compounds(const std::vector<Mat>& chain) {
  std::vector<double> s(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const double top = largest_singular_value(chain[k]);
    if (!(top > 0.0) || !std::isfinite(top)) {
      throw NonFiniteResult("cartan_from_compounds: degenerate compound");
    }
    s[k] = std::log(top);
  }
  return detail::from_partial_log_sums(s);
}

// Translation vector from the same chain; uses only the top eigenvalue
// modulus of each compound. Reliable for matrices whose top eigenvalue is
// comparable to the norm (cyclically reduced products are of this kind).
inline WeylVector jordan_from_compounds(const std::vector<Mat>& chain) {
  std::vector<double> s(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Mat& m = chain[k];
    double top;
    if (m.rows() == 2) {
      // 2x2: top modulus from trace and determinant only.
      const double tr = m(0, 0) + m(1, 1);
      const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      const double disc = 0.25 * tr * tr - det;
      top = disc >= 0.0 ? 0.5 * std::abs(tr) + std::sqrt(disc) : std::sqrt(std::abs(det));
    } else {
      top = largest_eigenvalue_modulus(m);
    }
    if (!std::isfinite(top)) throw NonFiniteResult("jordan_from_compounds: eigenvalue overflow");
    if (!(top > 0.0)) throw ZeroModulus("jordan_from_compounds: vanishing eigenvalue modulus");
    s[k] = std::log(top);
  }
  return detail::from_partial_log_sums(s);
}

// Compound chain of a single matrix, from its minors. Accurate for
// moderately scaled inputs; see the header note for long products.
inline std::vector<Mat> compound_chain(const Mat& g) {
  const int d = static_cast<int>(g.rows());
  std::vector<Mat> chain;
  chain.reserve(d - 1);
  chain.push_back(g);
  for (int k = 2; k <= d - 1; ++k) chain.push_back(compound_matrix(g, k));
  return chain;
}

inline void require_square(const Mat& g, const char* who) {
  if (g.rows() != g.cols() || g.rows() < 2) {
    throw DimensionMismatch(std::string(who) + ": expected a square matrix of dimension >= 2");
  }
  if (!all_finite(g)) throw NonFiniteResult(std::string(who) + ": non-finite entries");
}

// H(o, g.o): log singular values of g, sorted non-increasing.
inline WeylVector cartan_projection(const Mat& g) {
  require_square(g, "cartan_projection");
  return cartan_from_compounds(compound_chain(g));
}

// d(o, g.o) = ||H(o, g.o)||.
inline double orbit_distance(const Mat& g) { return cartan_projection(g).norm(); }

// L(g): log eigenvalue moduli of g, sorted non-increasing. Complex pairs
// contribute equal coordinates.
inline WeylVector jordan_projection(const Mat& g) {
  require_square(g, "jordan_projection");
  const int d = static_cast<int>(g.rows());
  if (d == 2) {
    return jordan_from_compounds({g});
  }
  Eigen::EigenSolver<Mat> es(g, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NonFiniteResult("jordan_projection: eigen iteration failed");
  Vec h(d);
  for (int i = 0; i < d; ++i) {
    const double mod = std::abs(es.eigenvalues()(i));
    if (!(mod > 0.0)) throw ZeroModulus("jordan_projection: vanishing eigenvalue modulus");
    if (!std::isfinite(mod)) throw NonFiniteResult("jordan_projection: eigenvalue overflow");
    h(i) = std::log(mod);
  }
  h.array() -= h.mean();  // det = 1 forces the log moduli to sum to zero
  std::sort(h.data(), h.data() + d, std::greater<double>());
  return WeylVector{std::move(h)};
}

// l(g) = ||L(g)||.
inline double translation_length(const Mat& g) { return jordan_projection(g).norm(); }

// Regular axial test: all consecutive log-eigenvalue gaps exceed gap_tol.
inline bool is_regular_axial(const Mat& g, double gap_tol = Tolerances{}.gap) {
  return jordan_projection(g).min_gap() > gap_tol;
}

// Attracting/repelling flags of a regular axial matrix: eigenvectors
// orthonormalized in order of decreasing (resp. increasing) modulus.
inline std::pair<Flag, Flag> fixed_flags(const Mat& g, double gap_tol = Tolerances{}.gap) {
  require_square(g, "fixed_flags");
  if (!is_regular_axial(g, gap_tol)) {
    throw NotRegular("fixed_flags: matrix is not regular axial at this gap tolerance");
  }
  const int d = static_cast<int>(g.rows());
  Eigen::EigenSolver<Mat> es(g);
  if (es.info() != Eigen::Success) throw NonFiniteResult("fixed_flags: eigen iteration failed");

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
  });

  Mat desc(d, d), asc(d, d);
  for (int i = 0; i < d; ++i) {
    desc.col(i) = es.eigenvectors().col(order[i]).real();
    asc.col(i) = es.eigenvectors().col(order[d - 1 - i]).real();
  }
  return {Flag{orthonormalize_columns(desc)}, Flag{orthonormalize_columns(asc)}};
}

// Direction flag of the orbit point g.o: the left orthogonal polar factor.
inline Flag cartan_flag(const Mat& g, double gap_tol = Tolerances{}.gap) {
  require_square(g, "cartan_flag");
  if (cartan_projection(g).min_gap() <= gap_tol) {
    throw NotRegular("cartan_flag: Cartan vector is not regular at this gap tolerance");
  }
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU);
  return Flag{svd.matrixU()};
}

// max_i sin(largest principal angle between the i-dimensional members).
// Symmetric, zero iff the subspace chains coincide, bounded by 1.
inline double flag_distance(const Flag& f1, const Flag& f2) {
  if (f1.dim() != f2.dim()) throw DimensionMismatch("flag_distance: dimension mismatch");
  const int d = f1.dim();
  double worst = 0.0;
  for (int i = 1; i <= d - 1; ++i) {
    Mat overlap = f1.frame.leftCols(i).transpose() * f2.frame.leftCols(i);
    Eigen::JacobiSVD<Mat> svd(overlap);
    const double c = std::min(1.0, svd.singularValues().minCoeff());
    worst = std::max(worst, std::sqrt(std::max(0.0, 1.0 - c * c)));
  }
  return worst;
}

// General position: every i-dimensional member of f1 spans R^d together
// with the (d-i)-dimensional member of f2.
inline bool is_transverse(const Flag& f1, const Flag& f2, double tol = Tolerances{}.transversal) {
  if (f1.dim() != f2.dim()) throw DimensionMismatch("is_transverse: dimension mismatch");
  const int d = f1.dim();
  Mat joint(d, d);
  for (int i = 1; i <= d - 1; ++i) {
    joint.leftCols(i) = f1.frame.leftCols(i);
    joint.rightCols(d - i) = f2.frame.leftCols(d - i);
    Eigen::JacobiSVD<Mat> svd(joint);
    if (svd.singularValues().minCoeff() <= tol) return false;
  }
  return true;
}

inline double chamber_angle(const WeylVector& h1, const WeylVector& h2) {
  if (h1.dim() != h2.dim()) throw DimensionMismatch("chamber_angle: dimension mismatch");
  const double n1 = h1.norm();
  const double n2 = h2.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw ZeroVector("chamber_angle: zero vector");
  // Kahan's formula; accurate near 0 and pi where acos(dot) loses digits.
  Vec u = h1.coords / n1;
  Vec v = h2.coords / n2;
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm());
}

// Projective action on flags: multiply the frame, re-orthonormalize in
// column order.
inline Flag act(const Mat& g, const Flag& f) {
  if (g.cols() != f.frame.rows()) throw DimensionMismatch("act: dimension mismatch");
  return Flag{orthonormalize_columns(g * f.frame)};
}

}  // namespace weyl
