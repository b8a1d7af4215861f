#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "liouville/elliptic.hpp"

namespace liouville {

namespace {

// Deterministic xorshift for start vectors.
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  double uniform() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) / static_cast<double>(1ull << 53) - 0.5;
  }
};

struct ShiftedSolve {
  Eigen::SimplicialLDLT<SparseSym> ldlt;
  // Sherman-Morrison data for each rank-one term of A - sigma B.
  std::vector<Eigen::VectorXd> sw;      // (S - sigma B)^{-1} w_k, updated sequentially
  std::vector<double> denom;            // 1 + rho_k w_k^T sw_k at stage k
  std::vector<std::pair<double, Eigen::VectorXd>> rank_one;

  // Applies (A - sigma B)^{-1}.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = ldlt.solve(b);
    for (size_t k = 0; k < rank_one.size(); ++k) {
      const auto& [rho, w] = rank_one[k];
      x -= (rho * w.dot(x) / denom[k]) * sw[k];
    }
    return x;
  }
};

// Factorization of A - sigma B with staged Sherman-Morrison for the rank-one
// parts. Returns false if the sparse part hits a structural issue.
bool factor_shifted(const SymOperator& A, const SparseSym& B, double sigma, ShiftedSolve& out) {
  SparseSym shifted = A.sparse - sigma * B;
  out.ldlt.compute(shifted);
  if (out.ldlt.info() != Eigen::Success) return false;
  out.rank_one = A.rank_one;
  out.sw.clear();
  out.denom.clear();
  for (size_t k = 0; k < out.rank_one.size(); ++k) {
    const auto& [rho, w] = out.rank_one[k];
    Eigen::VectorXd x = out.ldlt.solve(w);
    // Fold in the previous rank-one terms.
    for (size_t j = 0; j < k; ++j) {
      const auto& [rj, wj] = out.rank_one[j];
      x -= (rj * wj.dot(x) / out.denom[j]) * out.sw[j];
    }
    out.sw.push_back(x);
    out.denom.push_back(1.0 + rho * w.dot(x));
  }
  return true;
}

// Negative-eigenvalue count (inertia) of A - sigma B. The bordered-matrix
// identity adds one for each rank-one stage whose denominator flips sign.
int inertia_below(const SymOperator& A, const SparseSym& B, double sigma, bool& ok) {
  ShiftedSolve s;
  ok = factor_shifted(A, B, sigma, s);
  if (!ok) return -1;
  int neg = 0;
  const auto& d = s.ldlt.vectorD();
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0) && d[i] == d[i]) ++neg;
    if (d[i] != d[i]) {
      ok = false;
      return -1;
    }
  }
  for (size_t k = 0; k < s.rank_one.size(); ++k) {
    double rho = s.rank_one[k].first;
    // neg(S + rho w w^T) = neg(S) + neg(-1/rho - w^T S^{-1} w) - neg(-1/rho)
    double q = s.rank_one[k].second.dot(s.sw[k]);
    int neg_schur = (-1.0 / rho - q) < 0.0 ? 1 : 0;
    int neg_rho = (-1.0 / rho) < 0.0 ? 1 : 0;
    neg += neg_schur - neg_rho;
  }
  return neg;
}

bool is_pd(const SymOperator& A, const SparseSym& B, double sigma) {
  bool ok = false;
  int neg = inertia_below(A, B, sigma, ok);
  return ok && neg == 0;
}

}  // namespace

int eigenvalues_below(const SymOperator& A, const SparseSym& B, double sigma) {
  bool ok = false;
  int neg = inertia_below(A, B, sigma, ok);
  if (!ok) throw NumericalError("inertia factorization failed");
  return neg;
}

std::vector<EigenPair> smallest_eigenpairs(const SymOperator& A, const SparseSym& B,
                                           const Eigen::VectorXd& weights, int count,
                                           EigSubspace subspace, const EigOptions& opts) {
  const int n = static_cast<int>(B.rows());
  if (count <= 0 || count >= n) throw PreconditionError("eigenpair count out of range");

  const double wsum = weights.sum();
  auto project = [&](Eigen::VectorXd& v) {
    if (subspace == EigSubspace::mean_zero) v.array() -= weights.dot(v) / wsum;
    if (opts.projector) opts.projector(v);
  };

  // Crude spectral location from a handful of plain Lanczos steps on B^{-1}A,
  // then a PD-verified shift below the smallest eigenvalue.
  Eigen::SimplicialLDLT<SparseSym> bldlt(B);
  if (bldlt.info() != Eigen::Success) throw NumericalError("mass factorization failed");

  Rng rng(opts.seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform();
  project(v);
  double lo_est = 0.0;
  {
    double nb = std::sqrt(v.dot(B * v));
    v /= nb;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
    double beta = 0.0;
    std::vector<double> alphas, betas;
    for (int it = 0; it < 30; ++it) {
      Eigen::VectorXd w = bldlt.solve(A.apply(v));
      project(w);
      double alpha = w.dot(B * v);
      w -= alpha * v + beta * prev;
      beta = std::sqrt(std::max(0.0, w.dot(B * w)));
      alphas.push_back(alpha);
      betas.push_back(beta);
      if (beta < 1e-14) break;
      prev = v;
      v = w / beta;
    }
    // Smallest Ritz value of the tridiagonal via bisection on Sturm counts.
    auto count_below = [&](double x) {
      int cnt = 0;
      double d = 1.0;
      for (size_t i = 0; i < alphas.size(); ++i) {
        double b2 = i == 0 ? 0.0 : betas[i - 1] * betas[i - 1];
        d = alphas[i] - x - b2 / d;
        if (d < 0.0) ++cnt;
        if (d == 0.0) d = 1e-300;
      }
      return cnt;
    };
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 60 && count_below(lo) > 0; ++i) lo *= 4.0;
    for (int i = 0; i < 60 && count_below(hi) == 0; ++i) hi *= 4.0;
    for (int i = 0; i < 80; ++i) {
      double midv = 0.5 * (lo + hi);
      (count_below(midv) > 0 ? hi : lo) = midv;
    }
    lo_est = lo;
  }

  double spread = std::max(1.0, std::abs(lo_est));
  double sigma = std::min(lo_est, 0.0) - 0.01 * spread;
  ShiftedSolve shifted;
  bool pd = false;
  for (int attempt = 0; attempt < 60; ++attempt) {
    if (is_pd(A, B, sigma)) {
      pd = factor_shifted(A, B, sigma, shifted);
      break;
    }
    sigma = sigma * 2.0 - 0.1 * spread;
  }
  if (!pd) throw NumericalError("could not bracket the spectrum bottom");

  // Shift-invert Lanczos in the B inner product with full reorthogonalization.
  const int m_max = std::min(opts.max_lanczos, n - 2);
  std::vector<Eigen::VectorXd> Q;
  std::vector<Eigen::VectorXd> BQ;
  std::vector<double> alphas, betas;

  Eigen::VectorXd q(n);
  Rng rng2(opts.seed ^ 0xabcdef123ull);
  for (int i = 0; i < n; ++i) q[i] = rng2.uniform();
  project(q);
  q /= std::sqrt(q.dot(B * q));

  for (int m = 1; m <= m_max; ++m) {
    Q.push_back(q);
    BQ.push_back(B * q);
    Eigen::VectorXd w = shifted.solve(BQ.back());
    project(w);
    alphas.push_back(w.dot(BQ.back()));
    // Full reorthogonalization (twice) against all previous vectors.
    for (int round = 0; round < 2; ++round) {
      for (size_t j = 0; j < Q.size(); ++j) w -= BQ[j].dot(w) * Q[j];
    }
    double beta = std::sqrt(std::max(0.0, w.dot(B * w)));
    betas.push_back(beta);

    bool breakdown = beta < 1e-13;
    bool check = (m >= count + 2) && (breakdown || m == m_max || m % 5 == 0);
    if (check) {
      // Ritz pairs of the m x m tridiagonal; largest mu are smallest lambda.
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alphas[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = betas[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      bool converged = true;
      for (int taken = 0; taken < count; ++taken) {
        int k = m - 1 - taken;
        double mu = es.eigenvalues()[k];
        double resid = std::abs(beta * es.eigenvectors()(m - 1, k));
        if (resid > opts.tol * std::max(1.0, std::abs(mu))) converged = false;
      }
      if (converged || breakdown || m == m_max) {
        if (!converged && !breakdown)
          throw NumericalError("eigensolver did not converge within the iteration cap");
        std::vector<EigenPair> result;
        for (int taken = 0; taken < count; ++taken) {
          int k = m - 1 - taken;
          double mu = es.eigenvalues()[k];
          if (std::abs(mu) < 1e-300) throw NumericalError("shift-invert breakdown");
          EigenPair pair;
          pair.value = sigma + 1.0 / mu;
          pair.field = Eigen::VectorXd::Zero(n);
          for (int j = 0; j < m; ++j) pair.field += es.eigenvectors()(j, k) * Q[j];
          pair.field /= std::sqrt(pair.field.dot(B * pair.field));
          result.push_back(std::move(pair));
        }
        std::sort(result.begin(), result.end(),
                  [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
        return result;
      }
    }
    if (breakdown)
      throw NumericalError("Lanczos breakdown before requested eigenpair count");
    q = w / beta;
  }
  throw NumericalError("eigensolver did not converge");
}

}  // namespace liouville
