#include "clr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace clr {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw DimensionError(msg);
}

// splitmix64: small deterministic generator for start vectors.
std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

DenseMatrix gemm(const DenseMatrix& a, const DenseMatrix& b, double alpha) {
  require(a.cols() == b.rows(), "gemm: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  gemm_accumulate(c, a, b, alpha);
  return c;
}

void gemm_accumulate(DenseMatrix& c, const DenseMatrix& a,
                     const DenseMatrix& b, double alpha) {
  require(a.cols() == b.rows(), "gemm: inner dimensions differ");
  require(c.rows() == a.rows() && c.cols() == b.cols(),
          "gemm: output shape mismatch");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  // Column-major axpy form: c(:,j) += (alpha * b(l,j)) * a(:,l).
  for (std::size_t j = 0; j < n; ++j) {
    double* cj = c.col(j);
    const double* bj = b.col(j);
    for (std::size_t l = 0; l < k; ++l) {
      const double s = alpha * bj[l];
      if (s == 0.0) continue;
      const double* al = a.col(l);
      for (std::size_t i = 0; i < m; ++i) cj[i] += s * al[i];
    }
  }
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) t(j, i) = m(i, j);
  return t;
}

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  const double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

namespace {

// Applies the Householder reflector stored in v (length m-offset, v[0]=1
// implicit) to columns [from, n) of a, rows [offset, m).
void apply_reflector(DenseMatrix& a, std::size_t offset, const double* v,
                     double tau, std::size_t from) {
  const std::size_t m = a.rows(), n = a.cols(), len = m - offset;
  for (std::size_t j = from; j < n; ++j) {
    double* col = a.col(j) + offset;
    double dot = col[0];
    for (std::size_t i = 1; i < len; ++i) dot += v[i] * col[i];
    dot *= tau;
    col[0] -= dot;
    for (std::size_t i = 1; i < len; ++i) col[i] -= dot * v[i];
  }
}

// Builds a reflector for column k of a (rows k..m-1); returns tau and leaves
// v (normalized so v[0] == 1) in vbuf. The column is overwritten with
// (beta, v[1:]) as in LAPACK's compact form.
double make_reflector(DenseMatrix& a, std::size_t k, std::vector<double>& vbuf) {
  const std::size_t m = a.rows(), len = m - k;
  double* x = a.col(k) + k;
  double normx = 0.0;
  for (std::size_t i = 0; i < len; ++i) normx += x[i] * x[i];
  normx = std::sqrt(normx);
  if (normx == 0.0) {
    vbuf.assign(len, 0.0);
    vbuf[0] = 1.0;
    return 0.0;
  }
  const double beta = x[0] >= 0.0 ? -normx : normx;
  const double v0 = x[0] - beta;
  vbuf.resize(len);
  vbuf[0] = 1.0;
  for (std::size_t i = 1; i < len; ++i) vbuf[i] = x[i] / v0;
  const double tau = (beta - x[0]) / beta;
  x[0] = beta;
  for (std::size_t i = 1; i < len; ++i) x[i] = vbuf[i];
  return tau;
}

}  // namespace

CpqrResult cpqr(const DenseMatrix& m, double tol) {
  require(m.rows() > 0 && m.cols() > 0, "cpqr: empty matrix");
  const std::size_t nr = m.rows(), nc = m.cols(), kmax = std::min(nr, nc);

  DenseMatrix a = m;
  std::vector<std::size_t> perm(nc);
  for (std::size_t j = 0; j < nc; ++j) perm[j] = j;
  std::vector<double> taus;
  std::vector<double> vbuf;
  std::vector<std::vector<double>> vs;

  const double tol_sq = tol * tol;
  std::size_t rank = kmax;
  for (std::size_t k = 0; k < kmax; ++k) {
    // Trailing norms are recomputed exactly each step; tiles are small enough
    // that downdating is not worth the loss of robustness.
    std::size_t pivot = k;
    double best = -1.0, trailing = 0.0;
    for (std::size_t j = k; j < nc; ++j) {
      double s = 0.0;
      const double* col = a.col(j);
      for (std::size_t i = k; i < nr; ++i) s += col[i] * col[i];
      trailing += s;
      if (s > best) {
        best = s;
        pivot = j;
      }
    }
    if (trailing <= tol_sq) {
      rank = k;
      break;
    }
    if (pivot != k) {
      for (std::size_t i = 0; i < nr; ++i)
        std::swap(a(i, k), a(i, pivot));
      std::swap(perm[k], perm[pivot]);
    }
    const double tau = make_reflector(a, k, vbuf);
    taus.push_back(tau);
    vs.push_back(vbuf);
    if (tau != 0.0) apply_reflector(a, k, vbuf.data(), tau, k + 1);
  }

  CpqrResult out;
  out.rank = rank;
  out.perm = std::move(perm);
  out.r = DenseMatrix(rank, nc);
  for (std::size_t j = 0; j < nc; ++j)
    for (std::size_t i = 0; i < std::min(rank, j + 1); ++i)
      out.r(i, j) = a(i, j);

  // Accumulate Q = H_0 ... H_{rank-1} applied to the first `rank` columns
  // of the identity, in reverse order.
  out.q = DenseMatrix(nr, rank);
  for (std::size_t j = 0; j < rank; ++j) out.q(j, j) = 1.0;
  for (std::size_t k = rank; k-- > 0;) {
    if (taus[k] == 0.0) continue;
    apply_reflector(out.q, k, vs[k].data(), taus[k], 0);
  }
  return out;
}

QrResult qr_thin(const DenseMatrix& m) {
  require(m.rows() > 0 && m.cols() > 0, "qr_thin: empty matrix");
  const std::size_t nr = m.rows(), nc = m.cols(), k = std::min(nr, nc);

  DenseMatrix a = m;
  std::vector<double> taus(k);
  std::vector<std::vector<double>> vs(k);
  std::vector<double> vbuf;
  for (std::size_t i = 0; i < k; ++i) {
    taus[i] = make_reflector(a, i, vbuf);
    vs[i] = vbuf;
    if (taus[i] != 0.0) apply_reflector(a, i, vbuf.data(), taus[i], i + 1);
  }

  QrResult out;
  out.r = DenseMatrix(k, nc);
  for (std::size_t j = 0; j < nc; ++j)
    for (std::size_t i = 0; i < std::min(k, j + 1); ++i) out.r(i, j) = a(i, j);
  out.q = DenseMatrix(nr, k);
  for (std::size_t j = 0; j < k; ++j) out.q(j, j) = 1.0;
  for (std::size_t i = k; i-- > 0;) {
    if (taus[i] == 0.0) continue;
    apply_reflector(out.q, i, vs[i].data(), taus[i], 0);
  }
  return out;
}

double two_norm_estimate(const DenseMatrix& m, std::size_t iters,
                         std::uint64_t seed) {
  require(m.rows() == m.cols(), "two_norm_estimate: matrix not square");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;

  std::uint64_t state = seed ^ 0xc1a0c1a0c1a0c1a0ull;
  std::vector<double> v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = uniform01(state) - 0.5;

  double estimate = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    double nv = 0.0;
    for (std::size_t i = 0; i < n; ++i) nv += v[i] * v[i];
    nv = std::sqrt(nv);
    if (nv == 0.0) {  // restart from a fresh vector
      for (std::size_t i = 0; i < n; ++i) v[i] = uniform01(state) - 0.5;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] /= nv;
    // w = m v
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double vj = v[j];
      if (vj == 0.0) continue;
      const double* col = m.col(j);
      for (std::size_t i = 0; i < n; ++i) w[i] += col[i] * vj;
    }
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += v[i] * w[i];
    estimate = std::abs(rq);
    v.swap(w);
  }
  return estimate;
}

}  // namespace clr
