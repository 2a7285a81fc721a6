#pragma once

// Sparse symmetric linear algebra on top of Eigen's storage types: a
// simplicial up-looking Cholesky with reusable symbolic analysis, GMRF
// sampling, marginal variances and Kronecker products.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/KroneckerProduct>

#include "firecast/errors.hpp"

namespace firecast {

template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using SpMat = SparseMatrix<double>;
using Permutation = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>;

enum class Ordering { Natural, Amd };

/// Pivots at or below this fraction of the largest diagonal entry are
/// rejected as not positive definite.
inline constexpr double kPivotTolerance = 1e-12;

/// splitmix64, used to derive independent per-draw seeds from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename Scalar>
bool same_pattern(const SparseMatrix<Scalar>& a, const SparseMatrix<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) {
    return false;
  }
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1,
                    b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(),
                    b.innerIndexPtr());
}

/// Fill-reducing permutation, elimination tree and exact column structure
/// of L for one sparsity pattern. Immutable; share between factorizations of
/// matrices with the same pattern.
template <typename Scalar>
class CholeskyAnalysis {
 public:
  CholeskyAnalysis(const SparseMatrix<Scalar>& q, Ordering ordering) : pattern_(q) {
    if (q.rows() != q.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "cholesky requires a square matrix");
    }
    pattern_.makeCompressed();
    const int n = static_cast<int>(q.rows());
    if (ordering == Ordering::Amd && n > 1) {
      Permutation inverse;
      Eigen::AMDOrdering<int> amd;
      amd(pattern_, inverse);
      perm_ = inverse.inverse();
    } else {
      perm_.setIdentity(n);
    }
    permuted_pattern_ = pattern_.twistedBy(perm_);

    parent_.assign(n, -1);
    std::vector<int> ancestor(n, -1);
    const int* cp = permuted_pattern_.outerIndexPtr();
    const int* ci = permuted_pattern_.innerIndexPtr();
    for (int k = 0; k < n; ++k) {
      for (int p = cp[k]; p < cp[k + 1]; ++p) {
        for (int i = ci[p]; i != -1 && i < k;) {
          const int next = ancestor[i];
          ancestor[i] = k;
          if (next == -1) parent_[i] = k;
          i = next;
        }
      }
    }

    std::vector<int> counts(n, 1);
    std::vector<int> stack(n);
    std::vector<int> mark(n, -1);
    for (int k = 0; k < n; ++k) {
      const int top = ereach(k, stack, mark);
      for (int t = top; t < n; ++t) ++counts[stack[t]];
    }
    col_ptr_.assign(n + 1, 0);
    for (int k = 0; k < n; ++k) col_ptr_[k + 1] = col_ptr_[k] + counts[k];
  }

  int size() const { return static_cast<int>(parent_.size()); }
  const Permutation& permutation() const { return perm_; }
  const SparseMatrix<Scalar>& pattern() const { return pattern_; }
  long long factor_nonzeros() const { return col_ptr_.back(); }

  /// Pattern of row k of L (excluding the diagonal) in stack[top..n).
  int ereach(int k, std::vector<int>& stack, std::vector<int>& mark) const {
    const int n = size();
    int top = n;
    mark[k] = k;
    const int* cp = permuted_pattern_.outerIndexPtr();
    const int* ci = permuted_pattern_.innerIndexPtr();
    for (int p = cp[k]; p < cp[k + 1]; ++p) {
      int i = ci[p];
      if (i > k) continue;
      int len = 0;
      for (; mark[i] != k; i = parent_[i]) {
        stack[len++] = i;
        mark[i] = k;
      }
      while (len > 0) stack[--top] = stack[--len];
    }
    return top;
  }

  const std::vector<int>& column_pointers() const { return col_ptr_; }

 private:
  SparseMatrix<Scalar> pattern_;
  SparseMatrix<Scalar> permuted_pattern_;
  Permutation perm_;
  std::vector<int> parent_;
  std::vector<int> col_ptr_;
};

/// P Q P^T = L L^T. Immutable after construction; concurrent solves and
/// sampling against one factor are safe.
template <typename Scalar>
class CholeskyFactor {
 public:
  using VectorType = Vector<Scalar>;

  CholeskyFactor() = default;

  explicit CholeskyFactor(const SparseMatrix<Scalar>& q, Ordering ordering = Ordering::Amd)
      : CholeskyFactor(std::make_shared<const CholeskyAnalysis<Scalar>>(q, ordering), q) {}

  /// Numeric factorization reusing `analysis`; `q` must have its pattern.
  CholeskyFactor(std::shared_ptr<const CholeskyAnalysis<Scalar>> analysis,
                 const SparseMatrix<Scalar>& q)
      : analysis_(std::move(analysis)) {
    SparseMatrix<Scalar> qc = q;
    qc.makeCompressed();
    if (!same_pattern(qc, analysis_->pattern())) {
      throw Error(ErrorKind::DimensionMismatch,
                  "matrix pattern differs from the symbolic analysis");
    }
    factorize(qc);
  }

  Eigen::Index size() const { return l_.rows(); }
  const SparseMatrix<Scalar>& matrix_l() const { return l_; }
  const Permutation& permutation() const { return analysis_->permutation(); }
  const std::shared_ptr<const CholeskyAnalysis<Scalar>>& analysis() const {
    return analysis_;
  }

  template <typename Rhs>
  Matrix<Scalar> solve(const Eigen::MatrixBase<Rhs>& b) const {
    check_rows(b.rows());
    Matrix<Scalar> y = permutation() * b;
    l_.template triangularView<Eigen::Lower>().solveInPlace(y);
    l_.transpose().template triangularView<Eigen::Upper>().solveInPlace(y);
    return permutation().transpose() * y;
  }

  VectorType solve(const VectorType& b) const {
    check_rows(b.rows());
    VectorType y = permutation() * b;
    l_.template triangularView<Eigen::Lower>().solveInPlace(y);
    l_.transpose().template triangularView<Eigen::Upper>().solveInPlace(y);
    return permutation().transpose() * y;
  }

  Scalar log_det() const {
    Scalar sum = 0;
    for (Eigen::Index k = 0; k < l_.cols(); ++k) {
      sum += std::log(l_.valuePtr()[l_.outerIndexPtr()[k]]);
    }
    return Scalar(2) * sum;
  }

  /// P^T L^{-T} z for a given standard-normal vector z.
  VectorType color(const VectorType& z) const {
    check_rows(z.rows());
    VectorType y = z;
    l_.transpose().template triangularView<Eigen::Upper>().solveInPlace(y);
    return permutation().transpose() * y;
  }

  /// k draws from N(mean, Q^{-1}) as columns. Draw j uses a seed derived from
  /// (seed, j), so results do not depend on how draws are scheduled.
  Matrix<Scalar> sample(const VectorType& mean, std::uint64_t seed, int k) const {
    check_rows(mean.rows());
    Matrix<Scalar> out(size(), k);
    VectorType z(size());
    for (int j = 0; j < k; ++j) {
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < size(); ++i) z[i] = Scalar(normal(rng));
      out.col(j) = mean + color(z);
    }
    return out;
  }

  /// diag(Q^{-1}) by the Takahashi recursions: the inverse is computed on
  /// the pattern of L only, from the last column backwards.
  VectorType marginal_variances() const {
    const int n = static_cast<int>(size());
    const int* cp = l_.outerIndexPtr();
    const int* ri = l_.innerIndexPtr();
    const Scalar* lx = l_.valuePtr();
    std::vector<Scalar> sigma(static_cast<std::size_t>(l_.nonZeros()));
    std::vector<Scalar> work(n), acc;
    for (int j = n - 1; j >= 0; --j) {
      const int first = cp[j] + 1, last = cp[j + 1];
      const Scalar d = lx[cp[j]];
      acc.assign(last - first, Scalar(0));
      for (int a = first; a < last; ++a) {
        const int k = ri[a];
        // Rows of S_j below k all lie in column k of the filled pattern.
        for (int p = cp[k] + 1; p < cp[k + 1]; ++p) work[ri[p]] = sigma[p];
        acc[a - first] += lx[a] * sigma[cp[k]];
        for (int b = a + 1; b < last; ++b) {
          const Scalar v = work[ri[b]];
          acc[b - first] += lx[a] * v;
          acc[a - first] += lx[b] * v;
        }
      }
      Scalar diag = Scalar(1) / (d * d);
      for (int a = first; a < last; ++a) {
        sigma[a] = -acc[a - first] / d;
        diag += lx[a] * acc[a - first] / (d * d);
      }
      sigma[cp[j]] = diag;
    }
    VectorType var(n);
    const auto& indices = permutation().indices();
    for (int i = 0; i < n; ++i) var[i] = sigma[cp[indices[i]]];
    return var;
  }

  /// Rebuilds P^T L L^T P for reconstruction checks.
  SparseMatrix<Scalar> reconstruct() const {
    SparseMatrix<Scalar> llt = l_ * l_.transpose();
    SparseMatrix<Scalar> out;
    out = llt.twistedBy(permutation().transpose());
    return out;
  }

 private:
  void check_rows(Eigen::Index rows) const {
    if (rows != size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "right-hand side has " + std::to_string(rows) +
                      " rows, factor has " + std::to_string(size()));
    }
  }

  void factorize(const SparseMatrix<Scalar>& q) {
    const int n = analysis_->size();
    SparseMatrix<Scalar> c;
    c = q.twistedBy(permutation());
    const std::vector<int>& lp = analysis_->column_pointers();
    const Eigen::Index nnz = lp.back();

    Scalar max_diag = 0;
    for (int k = 0; k < n; ++k) max_diag = std::max(max_diag, std::abs(q.coeff(k, k)));
    const Scalar threshold = Scalar(kPivotTolerance) * max_diag;

    l_.resize(n, n);
    l_.resizeNonZeros(nnz);
    int* outer = l_.outerIndexPtr();
    int* inner = l_.innerIndexPtr();
    Scalar* values = l_.valuePtr();
    std::copy(lp.begin(), lp.end(), outer);

    std::vector<int> next(lp.begin(), lp.end() - 1);
    std::vector<int> stack(n);
    std::vector<int> mark(n, -1);
    VectorType x = VectorType::Zero(n);
    const int* cp = c.outerIndexPtr();
    const int* ci = c.innerIndexPtr();
    const Scalar* cx = c.valuePtr();
    for (int k = 0; k < n; ++k) {
      const int top = analysis_->ereach(k, stack, mark);
      x[k] = 0;
      for (int p = cp[k]; p < cp[k + 1]; ++p) {
        if (ci[p] <= k) x[ci[p]] = cx[p];
      }
      Scalar d = x[k];
      x[k] = 0;
      for (int t = top; t < n; ++t) {
        const int i = stack[t];
        const Scalar lki = x[i] / values[outer[i]];
        x[i] = 0;
        for (int p = outer[i] + 1; p < next[i]; ++p) x[inner[p]] -= values[p] * lki;
        d -= lki * lki;
        const int p = next[i]++;
        inner[p] = k;
        values[p] = lki;
      }
      if (!(d > threshold)) {
        throw NotPositiveDefinite(permutation().indices().size() > 0
                                      ? inverse_index(k)
                                      : k,
                                  static_cast<double>(d));
      }
      const int p = next[k]++;
      inner[p] = k;
      values[p] = std::sqrt(d);
    }
  }

  int inverse_index(int k) const {
    const auto& idx = permutation().indices();
    for (int i = 0; i < idx.size(); ++i) {
      if (idx[i] == k) return i;
    }
    return k;
  }

  std::shared_ptr<const CholeskyAnalysis<Scalar>> analysis_;
  SparseMatrix<Scalar> l_;
};

/// Thread-safe memo of the symbolic analysis for one recurring pattern.
template <typename Scalar>
class AnalysisCache {
 public:
  explicit AnalysisCache(Ordering ordering = Ordering::Amd) : ordering_(ordering) {}

  std::shared_ptr<const CholeskyAnalysis<Scalar>> get(const SparseMatrix<Scalar>& q) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!cached_ || !same_pattern(q, cached_->pattern())) {
      cached_ = std::make_shared<const CholeskyAnalysis<Scalar>>(q, ordering_);
    }
    return cached_;
  }

  CholeskyFactor<Scalar> factorize(const SparseMatrix<Scalar>& q) {
    SparseMatrix<Scalar> qc = q;
    qc.makeCompressed();
    return CholeskyFactor<Scalar>(get(qc), qc);
  }

 private:
  Ordering ordering_;
  std::mutex mutex_;
  std::shared_ptr<const CholeskyAnalysis<Scalar>> cached_;
};

/// Kronecker product a ⊗ b.
template <typename Scalar>
SparseMatrix<Scalar> kron(const SparseMatrix<Scalar>& a, const SparseMatrix<Scalar>& b) {
  SparseMatrix<Scalar> out = Eigen::kroneckerProduct(a, b);
  out.makeCompressed();
  return out;
}

template <typename Scalar>
SparseMatrix<Scalar> identity(Eigen::Index n) {
  SparseMatrix<Scalar> eye(n, n);
  eye.setIdentity();
  return eye;
}

/// Block-diagonal concatenation.
template <typename Scalar>
SparseMatrix<Scalar> block_diagonal(const std::vector<SparseMatrix<Scalar>>& blocks) {
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
    nnz += b.nonZeros();
  }
  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(nnz);
  Eigen::Index r0 = 0, c0 = 0;
  for (const auto& b : blocks) {
    for (Eigen::Index k = 0; k < b.outerSize(); ++k) {
      for (typename SparseMatrix<Scalar>::InnerIterator it(b, k); it; ++it) {
        entries.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()),
                             it.value());
      }
    }
    r0 += b.rows();
    c0 += b.cols();
  }
  SparseMatrix<Scalar> out(rows, cols);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

/// Plain-text triplet dump: header `n m nnz`, then `i j value` (0-based).
template <typename Scalar, int Options>
void write_triplets(std::ostream& os, const Eigen::SparseMatrix<Scalar, Options, int>& m) {
  const auto old = os.precision(std::numeric_limits<Scalar>::max_digits10);
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar, Options, int>::InnerIterator it(m, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  os.precision(old);
}

template <typename Scalar = double>
SparseMatrix<Scalar> read_triplets(std::istream& is) {
  long long n = -1, m = -1, nnz = -1;
  if (!(is >> n >> m >> nnz) || n < 0 || m < 0 || nnz < 0) {
    throw Error(ErrorKind::Parse, "triplet file: bad header");
  }
  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(nnz);
  for (long long k = 0; k < nnz; ++k) {
    long long i = 0, j = 0;
    Scalar v{};
    if (!(is >> i >> j >> v) || i < 0 || i >= n || j < 0 || j >= m) {
      throw Error(ErrorKind::Parse, "triplet file: bad entry " + std::to_string(k));
    }
    entries.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SparseMatrix<Scalar> out(n, m);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace firecast
