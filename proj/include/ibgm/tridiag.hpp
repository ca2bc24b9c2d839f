#pragma once

/// @file tridiag.hpp
/// @brief Thomas solver, periodic (cyclic) tridiagonal solver and the
/// block Schur-complement decomposition used to split one periodic line
/// across several workers.
///
/// Coefficient naming: a = diagonal, b = super-diagonal, c = sub-diagonal.
/// Row i of a periodic system reads
///   c[i] x[i-1] + a[i] x[i] + b[i] x[i+1] = r[i]   (indices mod N),
/// so c[0] is the top-right corner and b[N-1] the bottom-left one.

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ibgm/errors.hpp"

namespace ibgm {

/// Precomputed forward elimination of a non-periodic tridiagonal matrix.
/// c[0] and b[n-1] are ignored.
class ThomasFactor {
 public:
  ThomasFactor() = default;
  ThomasFactor(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
    const std::size_t n = a.size();
    if (n == 0 || b.size() != n || c.size() != n) throw std::invalid_argument("ThomasFactor: size mismatch");
    c_.assign(c.begin(), c.end());
    cp_.resize(n);
    inv_.resize(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = a[i] - (i ? c[i] * prev : 0.0);
      if (!(std::abs(m) > 1e-300) || !std::isfinite(m))
        throw NumericalError("zero pivot in tridiagonal elimination at row " + std::to_string(i));
      inv_[i] = 1.0 / m;
      cp_[i] = (i + 1 < n ? b[i] : 0.0) * inv_[i];
      prev = cp_[i];
    }
  }

  std::size_t size() const { return inv_.size(); }

  /// Solves in place; `x` holds the right-hand side on entry.
  void solve(std::span<double> x) const {
    const std::size_t n = inv_.size();
    x[0] *= inv_[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - c_[i] * x[i - 1]) * inv_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp_[i] * x[i + 1];
  }

  /// Strided variant for lines embedded in a multidimensional array.
  void solve_strided(double* x, std::ptrdiff_t stride) const {
    const std::size_t n = inv_.size();
    x[0] *= inv_[0];
    for (std::size_t i = 1; i < n; ++i)
      x[i * stride] = (x[i * stride] - c_[i] * x[(i - 1) * stride]) * inv_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i * stride] -= cp_[i] * x[(i + 1) * stride];
  }

 private:
  std::vector<double> c_, cp_, inv_;
};

/// x = T^{-1} rhs for a non-periodic tridiagonal T.
inline std::vector<double> thomas_solve(std::span<const double> a, std::span<const double> b,
                                        std::span<const double> c, std::span<const double> rhs) {
  ThomasFactor f(a, b, c);
  std::vector<double> x(rhs.begin(), rhs.end());
  f.solve(x);
  return x;
}

struct CyclicTridiagMatrix {
  std::vector<double> a, b, c;

  static CyclicTridiagMatrix constant(std::size_t n, double diag, double off) {
    return {std::vector<double>(n, diag), std::vector<double>(n, off), std::vector<double>(n, off)};
  }
  std::size_t size() const { return a.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = a.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = c[i] * x[(i + n - 1) % n] + a[i] * x[i] + b[i] * x[(i + 1) % n];
    return y;
  }

  bool strictly_dominant() const {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(std::abs(a[i]) > std::abs(b[i]) + std::abs(c[i]))) return false;
    return true;
  }
};

/// Direct periodic solve by bordering: x[0] is eliminated last, rows 1..N-1
/// form a plain tridiagonal system with two right-hand sides (the second,
/// the coupling column of x[0], is precomputed).
class CyclicFactor {
 public:
  CyclicFactor() = default;
  explicit CyclicFactor(const CyclicTridiagMatrix& m) : m_(m) {
    const std::size_t n = m.size();
    if (n == 0) throw std::invalid_argument("CyclicFactor: empty system");
    if (n <= 2) return;
    const std::span<const double> a(m.a), b(m.b), c(m.c);
    inner_ = ThomasFactor(a.subspan(1), b.subspan(1), c.subspan(1));
    coupling_.assign(n - 1, 0.0);
    coupling_[0] -= c[1];
    coupling_[n - 2] -= b[n - 1];
    inner_.solve(coupling_);
    denom_ = a[0] + b[0] * coupling_[0] + c[0] * coupling_[n - 2];
    if (!(std::abs(denom_) > 1e-300)) throw NumericalError("zero pivot in cyclic tridiagonal solve");
  }

  std::size_t size() const { return m_.size(); }
  const CyclicTridiagMatrix& matrix() const { return m_; }

  void solve(std::span<double> x) const { solve_strided(x.data(), 1); }

  void solve_strided(double* x, std::ptrdiff_t s) const {
    const std::size_t n = m_.size();
    if (n == 1) {
      const double d = m_.a[0] + m_.b[0] + m_.c[0];
      if (d == 0.0) throw NumericalError("zero pivot in 1x1 cyclic system");
      x[0] /= d;
      return;
    }
    if (n == 2) {
      // Both off-diagonal couplings of a row hit the same other unknown.
      const double a00 = m_.a[0], a01 = m_.b[0] + m_.c[0];
      const double a10 = m_.b[1] + m_.c[1], a11 = m_.a[1];
      const double det = a00 * a11 - a01 * a10;
      if (det == 0.0) throw NumericalError("singular 2x2 cyclic system");
      const double r0 = x[0], r1 = x[s];
      x[0] = (a11 * r0 - a01 * r1) / det;
      x[s] = (a00 * r1 - a10 * r0) / det;
      return;
    }
    const double r0 = x[0];
    inner_.solve_strided(x + s, s);
    const double x0 = (r0 - m_.b[0] * x[s] - m_.c[0] * x[(n - 1) * s]) / denom_;
    x[0] = x0;
    for (std::size_t i = 1; i < n; ++i) x[i * s] += coupling_[i - 1] * x0;
  }

 private:
  CyclicTridiagMatrix m_;
  ThomasFactor inner_;
  std::vector<double> coupling_;
  double denom_ = 1.0;
};

inline std::vector<double> cyclic_solve_serial(const CyclicTridiagMatrix& m, std::span<const double> rhs) {
  if (rhs.size() != m.size()) throw std::invalid_argument("cyclic_solve_serial: size mismatch");
  CyclicFactor f(m);
  std::vector<double> x(rhs.begin(), rhs.end());
  f.solve(x);
  return x;
}

/// Schur-complement splitting of a periodic tridiagonal system into P
/// contiguous blocks [M_p, M_{p+1}).
///
/// The first entry of every block is an interface unknown y_p; the remaining
/// entries x_p form a non-periodic block B_p coupled to y_p (first row) and
/// y_{p+1 mod P} (last row). With f*_p = B_p^{-1} f_p the interface system
///   S y = g - F f*,   S = C - F B^{-1} E
/// is periodic tridiagonal in p, and x_p = f*_p - (B_p^{-1}E_p) y.
class SchurFactorization {
 public:
  /// Three scalars a block contributes to the interface solve.
  struct Gathered {
    double first = 0.0;  // f*_p at the first interior entry
    double last = 0.0;   // f*_p at the last interior entry
    double g = 0.0;      // right-hand side at the interface entry
  };

  SchurFactorization(const CyclicTridiagMatrix& m, std::vector<int> boundaries)
      : m_(m), bounds_(std::move(boundaries)) {
    const int n = static_cast<int>(m.size());
    if (bounds_.empty() || bounds_.front() != 0) throw std::invalid_argument("Schur: boundaries must start at 0");
    bounds_.push_back(n);
    const int P = blocks();
    for (int p = 0; p < P; ++p)
      if (bounds_[p + 1] - bounds_[p] < 2)
        throw std::invalid_argument("Schur: every block needs at least two entries");
    if (P == 1) {
      serial_ = CyclicFactor(m);
      return;
    }
    block_.resize(P);
    col_left_.resize(P);
    col_right_.resize(P);
    for (int p = 0; p < P; ++p) {
      const int lo = bounds_[p] + 1, hi = bounds_[p + 1];  // interior [lo, hi)
      const auto len = static_cast<std::size_t>(hi - lo);
      std::vector<double> a(m.a.begin() + lo, m.a.begin() + hi);
      std::vector<double> b(m.b.begin() + lo, m.b.begin() + hi);
      std::vector<double> c(m.c.begin() + lo, m.c.begin() + hi);
      block_[p] = ThomasFactor(a, b, c);
      col_left_[p].assign(len, 0.0);
      col_left_[p][0] = m.c[lo];
      block_[p].solve(col_left_[p]);
      col_right_[p].assign(len, 0.0);
      col_right_[p][len - 1] = m.b[hi - 1];
      block_[p].solve(col_right_[p]);
    }
    CyclicTridiagMatrix s;
    s.a.resize(P);
    s.b.resize(P);
    s.c.resize(P);
    for (int p = 0; p < P; ++p) {
      const int q = (p + P - 1) % P;
      const int I = bounds_[p];
      s.a[p] = m.a[I] - m.c[I] * col_right_[q].back() - m.b[I] * col_left_[p].front();
      s.c[p] = -m.c[I] * col_left_[q].back();
      s.b[p] = -m.b[I] * col_right_[p].front();
    }
    schur_ = CyclicFactor(s);
  }

  int blocks() const { return static_cast<int>(bounds_.size()) - 1; }
  int block_begin(int p) const { return bounds_[p]; }
  int block_size(int p) const { return bounds_[p + 1] - bounds_[p]; }
  std::size_t size() const { return m_.size(); }
  const CyclicTridiagMatrix& matrix() const { return m_; }
  const CyclicTridiagMatrix& schur_matrix() const { return schur_.matrix(); }
  const CyclicFactor& serial_factor() const { return serial_; }

  /// Step 1 on block p: in-place f*_p = B_p^{-1} f_p on the interior entries
  /// of `blk` (blk[0] is the interface entry and is left alone).
  Gathered local_stage(int p, double* blk, std::ptrdiff_t s) const {
    Gathered out;
    out.g = blk[0];
    block_[p].solve_strided(blk + s, s);
    out.first = blk[s];
    out.last = blk[(block_size(p) - 1) * s];
    return out;
  }

  /// Steps 2-3 at the line master: y = S^{-1}(g - F f*).
  void interface_solve(std::span<const Gathered> gathered, std::span<double> y) const {
    const int P = blocks();
    for (int p = 0; p < P; ++p) {
      const int I = bounds_[p];
      const int q = (p + P - 1) % P;
      y[p] = gathered[p].g - m_.c[I] * gathered[q].last - m_.b[I] * gathered[p].first;
    }
    schur_.solve(y);
  }

  /// Step 5 on block p: x_p = f*_p - col_left y_p - col_right y_{p+1}.
  void correct(int p, double* blk, std::ptrdiff_t s, double y_self, double y_next) const {
    blk[0] = y_self;
    const auto& cl = col_left_[p];
    const auto& cr = col_right_[p];
    for (std::size_t i = 0; i < cl.size(); ++i) blk[(i + 1) * s] -= cl[i] * y_self + cr[i] * y_next;
  }

  /// All five steps in one address space (reference path and P = 1).
  std::vector<double> solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.begin(), rhs.end());
    solve_in_place(x.data(), 1);
    return x;
  }

  void solve_in_place(double* x, std::ptrdiff_t s) const {
    const int P = blocks();
    if (P == 1) {
      serial_.solve_strided(x, s);
      return;
    }
    std::vector<Gathered> gathered(P);
    for (int p = 0; p < P; ++p) gathered[p] = local_stage(p, x + bounds_[p] * s, s);
    std::vector<double> y(P);
    interface_solve(gathered, y);
    for (int p = 0; p < P; ++p) correct(p, x + bounds_[p] * s, s, y[p], y[(p + 1) % P]);
  }

 private:
  CyclicTridiagMatrix m_;
  std::vector<int> bounds_;
  std::vector<ThomasFactor> block_;
  std::vector<std::vector<double>> col_left_, col_right_;
  CyclicFactor schur_;
  CyclicFactor serial_;
};

/// Convenience: factor and solve once.
inline std::vector<double> schur_solve(const CyclicTridiagMatrix& m, const std::vector<int>& boundaries,
                                       std::span<const double> rhs) {
  return SchurFactorization(m, boundaries).solve(rhs);
}

/// Equal-size block boundaries for `blocks` workers over `n` entries.
inline std::vector<int> equal_blocks(int n, int blocks) {
  if (blocks <= 0 || n % blocks != 0) throw ConfigError("line length not divisible by block count");
  std::vector<int> b(blocks);
  for (int p = 0; p < blocks; ++p) b[p] = p * (n / blocks);
  return b;
}

/// Shared cache of constant-coefficient factorizations, keyed by
/// (axis, diagonal, off-diagonal, length, partition). Thread safe.
class FactorizationCache {
 public:
  std::shared_ptr<const SchurFactorization> get(int axis, double diag, double off, int n,
                                                const std::vector<int>& boundaries) {
    const Key key{axis, diag, off, n, boundaries};
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
    auto m = CyclicTridiagMatrix::constant(static_cast<std::size_t>(n), diag, off);
    if (!m.strictly_dominant()) throw NumericalError("line-solve matrix is not strictly diagonally dominant");
    auto f = std::make_shared<const SchurFactorization>(m, boundaries);
    if (f->blocks() > 1 && !f->schur_matrix().strictly_dominant())
      throw NumericalError("Schur complement lost diagonal dominance");
    cache_.emplace(key, f);
    ++built_;
    return f;
  }

  int factorizations_built() const {
    std::lock_guard lock(mu_);
    return built_;
  }
  int cache_hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }

 private:
  using Key = std::tuple<int, double, double, int, std::vector<int>>;
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const SchurFactorization>> cache_;
  int built_ = 0;
  int hits_ = 0;
};

}  // namespace ibgm
