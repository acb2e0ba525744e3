#pragma once

// Shared scalar types, error taxonomy and small numeric helpers used by the
// whole library. Everything here is allocation-light and exception-based.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace weyl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteResult : Error { explicit NonFiniteResult(const std::string& m) : Error(m) {} };
struct ZeroModulus     : Error { explicit ZeroModulus(const std::string& m) : Error(m) {} };
struct NotRegular      : Error { explicit NotRegular(const std::string& m) : Error(m) {} };
struct DimensionMismatch : Error { explicit DimensionMismatch(const std::string& m) : Error(m) {} };
struct ZeroVector      : Error { explicit ZeroVector(const std::string& m) : Error(m) {} };
struct NotVeryReduced  : Error { explicit NotVeryReduced(const std::string& m) : Error(m) {} };
struct EmptyCore       : Error { explicit EmptyCore(const std::string& m) : Error(m) {} };
struct ParseError      : Error { explicit ParseError(const std::string& m) : Error(m) {} };
struct NotUnimodular   : Error { explicit NotUnimodular(const std::string& m) : Error(m) {} };
struct NoPowerFound    : Error { explicit NoPowerFound(const std::string& m) : Error(m) {} };
struct NotTransverse   : Error { explicit NotTransverse(const std::string& m) : Error(m) {} };
struct PingPongFailed  : Error { explicit PingPongFailed(const std::string& m) : Error(m) {} };
struct Overflow        : Error { explicit Overflow(const std::string& m) : Error(m) {} };
struct BudgetExceeded  : Error { explicit BudgetExceeded(const std::string& m) : Error(m) {} };
struct WindowBeyondHorizon : Error { explicit WindowBeyondHorizon(const std::string& m) : Error(m) {} };
struct DegenerateWindow : Error { explicit DegenerateWindow(const std::string& m) : Error(m) {} };
struct FingerprintMismatch : Error { explicit FingerprintMismatch(const std::string& m) : Error(m) {} };

struct Tolerances {
  double det = 1e-9;          // relative unimodularity check
  double orth = 1e-9;         // frame orthonormality
  double gap = 1e-6;          // chamber regularity gap
  double transversal = 1e-8;  // smallest singular value for flag transversality
  double recon = 1e-7;        // polar reconstruction residual
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }

// splitmix64: cheap, well-mixed stream used to derive independent RNG seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = base;
  splitmix64(s);
  s ^= 0x632be59bd9b4e019ULL * (a + 1);
  splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (b + 1);
  return splitmix64(s);
}

// FNV-1a over bytes; used for config/census fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(s.data(), s.size(), h);
}

// Modified Gram-Schmidt in column order with one re-orthogonalization pass.
// Column order matters: the i-th output column refines the i-th input span,
// which is exactly the nested-subspace semantics flags rely on.
inline Mat orthonormalize_columns(const Mat& a) {
  Mat q = a;
  const Eigen::Index n = q.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
      }
    }
    const double nrm = q.col(j).norm();
    if (!(nrm > 1e-300)) {
      throw NonFiniteResult("orthonormalize_columns: rank-deficient frame");
    }
    q.col(j) /= nrm;
  }
  return q;
}

// Lexicographically ordered k-subsets of {0,...,n-1}.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

// k-th compound matrix: entries are k x k minors, subsets in lex order.
// Multiplicative (Cauchy-Binet), orthogonal in -> orthogonal out, and its
// singular values are the k-fold products of the input's singular values.
inline Mat compound_matrix(const Mat& a, int k) {
  const int n = static_cast<int>(a.rows());
  const auto subs = k_subsets(n, k);
  const int m = static_cast<int>(subs.size());
  Mat c(m, m);
  Mat block(k, k);
  for (int r = 0; r < m; ++r) {
    for (int s = 0; s < m; ++s) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) block(i, j) = a(subs[r][i], subs[s][j]);
      c(r, s) = block.determinant();
    }
  }
  return c;
}

inline double largest_singular_value(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

// Largest eigenvalue modulus of a real square matrix.
inline double largest_eigenvalue_modulus(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NonFiniteResult("eigenvalue iteration failed to converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace weyl
