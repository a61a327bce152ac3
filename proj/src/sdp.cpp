#include "certnet/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include <Eigen/SVD>

namespace certnet {

namespace {

int PackedIndex(int i, int j) {
  if (i > j) std::swap(i, j);
  return j * (j + 1) / 2 + i;
}

int PackedSize(LmiProblem::BlockKind kind, int n) {
  return kind == LmiProblem::BlockKind::kPsd ? n * (n + 1) / 2 : n;
}

// Packs a symmetric matrix so that <A, M> = a_packed . PackWeighted(M).
Eigen::VectorXd PackWeighted(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXd v(n * (n + 1) / 2);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i)
      v[j * (j + 1) / 2 + i] = (i == j) ? m(i, i) : m(i, j) + m(j, i);
  return v;
}

Eigen::MatrixXd Unpack(const Eigen::VectorXd& v, int n) {
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) m(i, j) = m(j, i) = v[j * (j + 1) / 2 + i];
  return m;
}

void PackedToIJ(int p, int& i, int& j) {
  j = static_cast<int>((std::sqrt(8.0 * p + 1.0) - 1.0) / 2.0);
  while (j * (j + 1) / 2 > p) --j;
  while ((j + 1) * (j + 2) / 2 <= p) ++j;
  i = p - j * (j + 1) / 2;
}

// Largest alpha with D + alpha*Delta >= 0 (D diagonal positive).
double MaxStep(const Eigen::VectorXd& d, const Eigen::MatrixXd& delta) {
  Eigen::VectorXd is = d.array().rsqrt();
  Eigen::MatrixXd m = is.asDiagonal() * delta * is.asDiagonal();
  m = (0.5 * (m + m.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double MaxStepDiag(const Eigen::VectorXd& d, const Eigen::VectorXd& delta) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.size(); ++i)
    if (delta[i] < 0) a = std::min(a, -d[i] / delta[i]);
  return a;
}

struct CoreBlock {
  int n = 0;
  bool diag = false;
  Eigen::SparseMatrix<double> A;  // packed x m, holds A_k = -F_k
  Eigen::MatrixXd C;              // dense (psd) or n x 1 (diag)
};

struct CoreResult {
  bool converged = false;
  bool lmi_infeasible = false;
  bool unbounded = false;
  bool failure = false;
  Eigen::VectorXd t;
  double pinf = 0, dinf = 0, gap = 0;
  int iterations = 0;
  std::vector<double> history;
  std::string message;
};

// Infeasible-start primal-dual predictor-corrector with NT scaling on
//   (P) min <C,X> s.t. <A_k,X> = b_k, X >= 0
//   (D) max b't  s.t. sum t_k A_k + S = C, S >= 0.
CoreResult SolveCore(const std::vector<CoreBlock>& blocks,
                     const Eigen::VectorXd& b, const SdpOptions& opts,
                     const std::function<bool(const Eigen::VectorXd&)>& accept) {
  const int m = static_cast<int>(b.size());
  const int nb = static_cast<int>(blocks.size());
  CoreResult res;

  auto apply_a = [&](const std::vector<Eigen::MatrixXd>& t_blocks) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < nb; ++k) {
      const auto& bl = blocks[k];
      if (bl.diag)
        out.noalias() += bl.A.transpose() * t_blocks[k].col(0);
      else
        out.noalias() += bl.A.transpose() * PackWeighted(t_blocks[k]);
    }
    return out;
  };
  auto apply_at = [&](const Eigen::VectorXd& t, int k) -> Eigen::MatrixXd {
    const auto& bl = blocks[k];
    Eigen::VectorXd v = bl.A * t;
    if (bl.diag) return v;
    return Unpack(v, bl.n);
  };

  // Initial point.
  std::vector<Eigen::MatrixXd> X(nb), S(nb);
  double total_dim = 0;
  const double bnorm = b.norm();
  double cnorm2 = 0;
  for (int k = 0; k < nb; ++k) {
    const auto& bl = blocks[k];
    total_dim += bl.n;
    cnorm2 += bl.C.squaredNorm();
    const double sn = std::sqrt(static_cast<double>(bl.n));
    double xi = std::max(10.0, sn);
    double eta = std::max({10.0, sn, bl.C.norm()});
    for (int c = 0; c < m; ++c) {
      double nrm2 = 0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(bl.A, c); it; ++it) {
        int i, j;
        if (bl.diag) {
          i = j = static_cast<int>(it.row());
        } else {
          PackedToIJ(static_cast<int>(it.row()), i, j);
        }
        nrm2 += (i == j ? 1.0 : 2.0) * it.value() * it.value();
      }
      const double nrm = std::sqrt(nrm2);
      if (nrm > 0) {
        xi = std::max(xi, sn * (1.0 + std::abs(b[c])) / (1.0 + nrm));
        eta = std::max(eta, nrm);
      }
    }
    if (bl.diag) {
      X[k] = Eigen::VectorXd::Constant(bl.n, xi);
      S[k] = Eigen::VectorXd::Constant(bl.n, eta);
    } else {
      X[k] = xi * Eigen::MatrixXd::Identity(bl.n, bl.n);
      S[k] = eta * Eigen::MatrixXd::Identity(bl.n, bl.n);
    }
  }
  const double cnorm = std::sqrt(cnorm2);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(m);

  std::vector<Eigen::MatrixXd> Rd(nb), G(nb), W(nb);
  std::vector<Eigen::VectorXd> d(nb);
  int stalls = 0;

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    res.iterations = iter;
    // Residuals and measures.
    Eigen::VectorXd rp = b - apply_a(X);
    double rd2 = 0, pobj = 0, xs = 0;
    for (int k = 0; k < nb; ++k) {
      Rd[k] = blocks[k].C - S[k] - apply_at(t, k);
      rd2 += Rd[k].squaredNorm();
      pobj += (blocks[k].C.array() * X[k].array()).sum();
      xs += (X[k].array() * S[k].array()).sum();
    }
    const double dobj = b.dot(t);
    const double mu = xs / total_dim;
    res.pinf = rp.norm() / (1.0 + bnorm);
    res.dinf = std::sqrt(rd2) / (1.0 + cnorm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    res.gap = std::max(xs, std::abs(pobj - dobj)) / denom;
    res.history.push_back(xs);
    if (opts.verbose) {
      std::fprintf(stderr, "it %3d pobj %+.6e dobj %+.6e pinf %.1e dinf %.1e gap %.1e\n",
                   iter, pobj, dobj, res.pinf, res.dinf, res.gap);
    }
    if (res.pinf <= opts.feas_tol && res.dinf <= opts.feas_tol &&
        res.gap <= opts.gap_tol) {
      if (accept(t)) {
        res.converged = true;
        break;
      }
    }
    if (iter == opts.max_iter) break;
    if (iter > 2) {
      if (pobj < 0) {
        const double ax = (b - rp).norm();
        if (ax / -pobj < opts.feas_tol && -pobj > 1e3 * (1.0 + bnorm)) {
          res.lmi_infeasible = true;
          res.message = "primal improving ray";
          break;
        }
      }
      if (dobj > 0) {
        double r2 = 0;
        for (int k = 0; k < nb; ++k) r2 += (blocks[k].C - Rd[k]).squaredNorm();
        if (std::sqrt(r2) / dobj < opts.feas_tol && dobj > 1e3 * (1.0 + cnorm)) {
          res.unbounded = true;
          res.message = "dual improving ray";
          break;
        }
      }
    }

    // NT scaling.
    for (int k = 0; k < nb; ++k) {
      if (blocks[k].diag) {
        Eigen::ArrayXd x = X[k].col(0).array(), s = S[k].col(0).array();
        G[k] = (x / s).sqrt().sqrt().matrix();
        W[k] = (x / s).sqrt().matrix();
        d[k] = (x * s).sqrt().matrix();
        continue;
      }
      Eigen::LLT<Eigen::MatrixXd> lx(X[k]), ls(S[k]);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) {
        res.failure = true;
        res.message = "iterate left the cone";
        res.t = t;
        return res;
      }
      Eigen::MatrixXd lxm = lx.matrixL();
      Eigen::MatrixXd lsm = ls.matrixL();
      Eigen::BDCSVD<Eigen::MatrixXd> svd(lsm.transpose() * lxm,
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
      d[k] = svd.singularValues();
      G[k] = lxm * svd.matrixV() * d[k].array().rsqrt().matrix().asDiagonal();
      W[k] = G[k] * G[k].transpose();
    }

    // Schur complement M_kl = sum_b <A_k, W A_l W>.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < nb; ++k) {
      const auto& bl = blocks[k];
      if (bl.diag) {
        Eigen::SparseMatrix<double> wa = W[k].col(0).asDiagonal() * bl.A;
        wa = W[k].col(0).asDiagonal() * wa;
        M += Eigen::MatrixXd(bl.A.transpose() * wa);
        continue;
      }
      const int n = bl.n;
      const Eigen::MatrixXd& w = W[k];
      Eigen::MatrixXd bmat(n, n);
      for (int l = 0; l < m; ++l) {
        const int nnz = bl.A.outerIndexPtr()[l + 1] - bl.A.outerIndexPtr()[l];
        if (nnz == 0) continue;
        if (2 * nnz <= n) {
          bmat.setZero();
          for (Eigen::SparseMatrix<double>::InnerIterator it(bl.A, l); it; ++it) {
            int i, j;
            PackedToIJ(static_cast<int>(it.row()), i, j);
            if (i == j) {
              bmat.noalias() += it.value() * w.col(i) * w.col(i).transpose();
            } else {
              bmat.noalias() += it.value() * w.col(i) * w.col(j).transpose();
              bmat.noalias() += it.value() * w.col(j) * w.col(i).transpose();
            }
          }
        } else {
          Eigen::MatrixXd al = Unpack(Eigen::VectorXd(bl.A.col(l)), n);
          bmat.noalias() = w * al * w;
        }
        M.col(l).noalias() += bl.A.transpose() * PackWeighted(bmat);
      }
    }
    M = (0.5 * (M + M.transpose())).eval();
    double reg = opts.regularization * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> chol;
    for (int attempt = 0; attempt < 6; ++attempt) {
      chol.compute(M + reg * Eigen::MatrixXd::Identity(m, m));
      if (chol.info() == Eigen::Success) break;
      reg *= 1e3;
    }
    if (chol.info() != Eigen::Success) {
      res.failure = true;
      res.message = "Schur complement not positive definite";
      res.t = t;
      return res;
    }

    struct Dir {
      Eigen::VectorXd dt;
      std::vector<Eigen::MatrixXd> dS, dSh, dXh;
    };
    auto direction = [&](const std::vector<Eigen::MatrixXd>& Y) {
      Dir r;
      std::vector<Eigen::MatrixXd> T(nb);
      for (int k = 0; k < nb; ++k) {
        if (blocks[k].diag) {
          Eigen::ArrayXd w = W[k].col(0).array();
          T[k] = (w * Y[k].col(0).array() - w * w * Rd[k].col(0).array()).matrix();
        } else {
          T[k] = G[k] * Y[k] * G[k].transpose() - W[k] * Rd[k] * W[k];
        }
      }
      Eigen::VectorXd rhs = rp - apply_a(T);
      r.dt = chol.solve(rhs);
      // Refinement against the unregularized matrix.
      for (int pass = 0; pass < 3; ++pass) r.dt += chol.solve(rhs - M * r.dt);
      r.dS.resize(nb);
      r.dSh.resize(nb);
      r.dXh.resize(nb);
      for (int k = 0; k < nb; ++k) {
        r.dS[k] = Rd[k] - apply_at(r.dt, k);
        if (blocks[k].diag) {
          r.dSh[k] = (W[k].col(0).array() * r.dS[k].col(0).array()).matrix();
        } else {
          r.dSh[k] = G[k].transpose() * r.dS[k] * G[k];
        }
        r.dXh[k] = Y[k] - r.dSh[k];
      }
      return r;
    };
    auto steps = [&](const Dir& dir, double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nb; ++k) {
        if (blocks[k].diag) {
          ap = std::min(ap, MaxStepDiag(d[k], dir.dXh[k].col(0)));
          ad = std::min(ad, MaxStepDiag(d[k], dir.dSh[k].col(0)));
        } else {
          ap = std::min(ap, MaxStep(d[k], dir.dXh[k]));
          ad = std::min(ad, MaxStep(d[k], dir.dSh[k]));
        }
      }
    };

    // Predictor.
    std::vector<Eigen::MatrixXd> Y(nb);
    for (int k = 0; k < nb; ++k) {
      if (blocks[k].diag)
        Y[k] = -d[k];
      else
        Y[k] = Eigen::MatrixXd((-d[k]).asDiagonal());
    }
    Dir pred = direction(Y);
    double ap, ad;
    steps(pred, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0;
    for (int k = 0; k < nb; ++k) {
      Eigen::MatrixXd xa = pred.dXh[k] * ap, sa = pred.dSh[k] * ad;
      if (blocks[k].diag) {
        mu_aff += ((d[k] + xa.col(0)).array() * (d[k] + sa.col(0)).array()).sum();
      } else {
        xa.diagonal() += d[k];
        sa.diagonal() += d[k];
        mu_aff += (xa.array() * sa.array()).sum();
      }
    }
    mu_aff /= total_dim;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    for (int k = 0; k < nb; ++k) {
      if (blocks[k].diag) {
        Eigen::ArrayXd dd = d[k].array();
        Eigen::ArrayXd r = 2.0 * (sigma * mu - dd * dd) -
                           2.0 * pred.dXh[k].col(0).array() * pred.dSh[k].col(0).array();
        Y[k] = (r / (2.0 * dd)).matrix();
      } else {
        const int n = blocks[k].n;
        Eigen::MatrixXd r = -(pred.dXh[k] * pred.dSh[k] + pred.dSh[k] * pred.dXh[k]);
        for (int i = 0; i < n; ++i) r(i, i) += 2.0 * (sigma * mu - d[k][i] * d[k][i]);
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) r(i, j) /= d[k][i] + d[k][j];
        Y[k] = r;
      }
    }
    Dir corr = direction(Y);
    steps(corr, ap, ad);
    const double tau = 0.9 + 0.09 * std::min(std::min(1.0, ap), std::min(1.0, ad));
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);

    for (int k = 0; k < nb; ++k) {
      if (blocks[k].diag) {
        X[k] += ap * (W[k].col(0).array() * corr.dXh[k].col(0).array()).matrix();
      } else {
        Eigen::MatrixXd dx = G[k] * corr.dXh[k] * G[k].transpose();
        X[k] += ap * 0.5 * (dx + dx.transpose());
      }
      S[k] += ad * corr.dS[k];
      if (!blocks[k].diag) S[k] = (0.5 * (S[k] + S[k].transpose())).eval();
    }
    t += ad * corr.dt;

    if (std::max(ap, ad) < 1e-10) {
      if (++stalls >= 3) {
        res.message = "step length stagnation";
        break;
      }
    } else {
      stalls = 0;
    }
  }
  res.t = t;
  return res;
}

struct Reduction {
  Eigen::VectorXd y0;
  Eigen::SparseMatrix<double> Z;  // n x k
  bool consistent = true;
};

// Affine parametrization y = y0 + Z t of {y : A y = b}.  Rows owning a
// variable that appears in no other row are solved for that variable; the
// rest goes through a dense SVD.
Reduction ReduceEqualities(int n, const Eigen::SparseMatrix<double>& a_col,
                           const Eigen::VectorXd& b) {
  Reduction red;
  const int m = static_cast<int>(a_col.rows());
  Eigen::SparseMatrix<double, Eigen::RowMajor> a = a_col;
  std::vector<int> count(n, 0);
  for (int r = 0; r < m; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it)
      if (it.value() != 0.0) ++count[it.col()];

  std::vector<int> pivot(m, -1);
  std::vector<bool> eliminated(n, false);
  for (int r = 0; r < m; ++r) {
    double rmax = 0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it)
      rmax = std::max(rmax, std::abs(it.value()));
    double best = 0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it) {
      const double v = std::abs(it.value());
      if (count[it.col()] == 1 && v >= 1e-6 * rmax && v > best) {
        best = v;
        pivot[r] = static_cast<int>(it.col());
      }
    }
    if (pivot[r] >= 0) eliminated[pivot[r]] = true;
  }

  std::vector<int> rest_rows;
  for (int r = 0; r < m; ++r)
    if (pivot[r] < 0) rest_rows.push_back(r);
  std::vector<int> dense_pos(n, -1), dense_vars;
  for (int r : rest_rows)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it)
      if (it.value() != 0.0 && dense_pos[it.col()] < 0) {
        dense_pos[it.col()] = static_cast<int>(dense_vars.size());
        dense_vars.push_back(static_cast<int>(it.col()));
      }

  // Dense block.
  Eigen::MatrixXd zd;
  Eigen::VectorXd yd;
  const int nd = static_cast<int>(dense_vars.size());
  if (!rest_rows.empty()) {
    Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(static_cast<int>(rest_rows.size()), nd);
    Eigen::VectorXd bd(static_cast<int>(rest_rows.size()));
    for (size_t q = 0; q < rest_rows.size(); ++q) {
      const int r = rest_rows[q];
      bd[q] = b[r];
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it)
        ad(q, dense_pos[it.col()]) += it.value();
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(ad, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    int rank = 0;
    while (rank < sv.size() && sv[rank] > 1e-10 * std::max(1.0, smax)) ++rank;
    Eigen::VectorXd ub = svd.matrixU().leftCols(rank).transpose() * bd;
    yd = svd.matrixV().leftCols(rank) *
         (ub.array() / sv.head(rank).array()).matrix();
    if ((ad * yd - bd).norm() > 1e-8 * (1.0 + bd.norm())) red.consistent = false;
    zd = svd.matrixV().rightCols(nd - rank);
  } else {
    yd.resize(0);
    zd.resize(0, 0);
  }

  // Column layout: free variables first, then dense nullspace columns.
  std::vector<int> free_col(n, -1);
  int k = 0;
  for (int j = 0; j < n; ++j)
    if (!eliminated[j] && dense_pos[j] < 0) free_col[j] = k++;
  const int kd = static_cast<int>(zd.cols());
  const int dense_off = k;
  k += kd;

  red.y0 = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  // Row of Z for a non-eliminated variable as (col, val) pairs.
  auto row_of = [&](int j, std::vector<std::pair<int, double>>& out) {
    out.clear();
    if (free_col[j] >= 0) {
      out.emplace_back(free_col[j], 1.0);
    } else if (dense_pos[j] >= 0) {
      for (int c = 0; c < kd; ++c) {
        const double v = zd(dense_pos[j], c);
        if (v != 0.0) out.emplace_back(dense_off + c, v);
      }
    }
  };
  std::vector<std::pair<int, double>> tmp;
  for (int j = 0; j < n; ++j) {
    if (eliminated[j]) continue;
    if (dense_pos[j] >= 0) red.y0[j] = yd[dense_pos[j]];
    row_of(j, tmp);
    for (auto [c, v] : tmp) trip.emplace_back(j, c, v);
  }
  std::map<int, double> acc;
  for (int r = 0; r < m; ++r) {
    const int p = pivot[r];
    if (p < 0) continue;
    double ap = 0, y0p = b[r];
    acc.clear();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, r); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (j == p) {
        ap += it.value();
        continue;
      }
      y0p -= it.value() * red.y0[j];
      row_of(j, tmp);
      for (auto [c, v] : tmp) acc[c] -= it.value() * v;
    }
    red.y0[p] = y0p / ap;
    for (auto [c, v] : acc)
      if (v != 0.0) trip.emplace_back(p, c, v / ap);
  }
  red.Z.resize(n, k);
  red.Z.setFromTriplets(trip.begin(), trip.end());
  return red;
}

}  // namespace

int LmiProblem::AddVariables(int count) {
  const int first = num_vars_;
  num_vars_ += count;
  objective_.conservativeResize(num_vars_);
  objective_.tail(count).setZero();
  return first;
}

int LmiProblem::AddPsdBlock(int size) {
  blocks_.push_back({BlockKind::kPsd, size, {}});
  return static_cast<int>(blocks_.size()) - 1;
}

int LmiProblem::AddNonnegBlock(int size) {
  blocks_.push_back({BlockKind::kNonneg, size, {}});
  return static_cast<int>(blocks_.size()) - 1;
}

void LmiProblem::AddBlockEntry(int block, int i, int j, int var, double value) {
  auto& bl = blocks_.at(block);
  if (i < 0 || j < 0 || i >= bl.size || j >= bl.size)
    throw std::out_of_range("block entry out of range");
  if (var < kConstant || var >= num_vars_)
    throw std::out_of_range("unknown decision variable");
  if (bl.kind == BlockKind::kNonneg && i != j)
    throw std::invalid_argument("off-diagonal entry in a diagonal block");
  const int p = bl.kind == BlockKind::kPsd ? PackedIndex(i, j) : i;
  if (value != 0.0) bl.entries.emplace_back(p, var + 1, value);
}

void LmiProblem::AddEquality(const std::vector<std::pair<int, double>>& terms,
                             double rhs) {
  const int row = static_cast<int>(eq_rhs_.size());
  for (auto [v, c] : terms) {
    if (v < 0 || v >= num_vars_) throw std::out_of_range("unknown variable");
    if (c != 0.0) eq_entries_.emplace_back(row, v, c);
  }
  eq_rhs_.push_back(rhs);
}

void LmiProblem::SetObjective(int var, double coef) { objective_[var] = coef; }

void LmiProblem::AddBounds(int var, double lo, double hi) {
  const int b = AddNonnegBlock(2);
  AddBlockEntry(b, 0, 0, var, 1.0);
  AddBlockEntry(b, 0, 0, kConstant, -lo);
  AddBlockEntry(b, 1, 1, var, -1.0);
  AddBlockEntry(b, 1, 1, kConstant, hi);
}

void LmiProblem::AddLowerBound(int var, double lo) {
  const int b = AddNonnegBlock(1);
  AddBlockEntry(b, 0, 0, var, 1.0);
  AddBlockEntry(b, 0, 0, kConstant, -lo);
}

Eigen::SparseMatrix<double> LmiProblem::EqualityMatrix() const {
  Eigen::SparseMatrix<double> a(num_equalities(), num_vars_);
  a.setFromTriplets(eq_entries_.begin(), eq_entries_.end());
  return a;
}

Eigen::VectorXd LmiProblem::EqualityRhs() const {
  return Eigen::Map<const Eigen::VectorXd>(eq_rhs_.data(),
                                           static_cast<int>(eq_rhs_.size()));
}

Eigen::SparseMatrix<double> LmiProblem::BlockMap(int b) const {
  const auto& bl = blocks_.at(b);
  Eigen::SparseMatrix<double> f(PackedSize(bl.kind, bl.size), num_vars_ + 1);
  f.setFromTriplets(bl.entries.begin(), bl.entries.end());
  return f;
}

Eigen::MatrixXd LmiProblem::EvaluateBlock(int b, const Eigen::VectorXd& y) const {
  const auto& bl = blocks_.at(b);
  Eigen::VectorXd one_y(num_vars_ + 1);
  one_y[0] = 1.0;
  one_y.tail(num_vars_) = y;
  Eigen::VectorXd v = BlockMap(b) * one_y;
  if (bl.kind == BlockKind::kNonneg) return v.asDiagonal();
  return Unpack(v, bl.size);
}

nlohmann::json LmiProblem::DebugDump() const {
  nlohmann::json j;
  j["num_vars"] = num_vars_;
  j["objective"] = std::vector<double>(objective_.data(), objective_.data() + num_vars_);
  nlohmann::json bl = nlohmann::json::array();
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    const auto& blk = blocks_[b];
    nlohmann::json jb;
    jb["kind"] = blk.kind == BlockKind::kPsd ? "psd" : "nonneg";
    jb["size"] = blk.size;
    // One dense row-major matrix per variable that touches the block.
    Eigen::SparseMatrix<double> f = BlockMap(b);
    nlohmann::json mats = nlohmann::json::object();
    for (int c = 0; c < f.cols(); ++c) {
      if (f.col(c).nonZeros() == 0) continue;
      Eigen::VectorXd v = f.col(c);
      Eigen::MatrixXd mat = blk.kind == BlockKind::kPsd
                                ? Unpack(v, blk.size)
                                : Eigen::MatrixXd(v.asDiagonal());
      std::vector<double> rm;
      for (int r = 0; r < mat.rows(); ++r)
        for (int q = 0; q < mat.cols(); ++q) rm.push_back(mat(r, q));
      mats[c == 0 ? std::string("F0") : "y" + std::to_string(c - 1)] = rm;
    }
    jb["matrices"] = mats;
    bl.push_back(jb);
  }
  j["blocks"] = bl;
  nlohmann::json eq = nlohmann::json::array();
  for (const auto& t : eq_entries_) eq.push_back({t.row(), t.col(), t.value()});
  j["equalities"] = {{"rows", num_equalities()}, {"entries", eq}, {"rhs", eq_rhs_}};
  return j;
}

std::string ToString(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

PsdResult PsdCheck(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix not square");
  if (m.size() == 0) return {true, std::numeric_limits<double>::infinity()};
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return {lmin >= -tol, lmin};
}

LmiSolution Solve(const LmiProblem& p, const SdpOptions& opts) {
  LmiSolution sol;
  const int n = p.num_vars();
  const int nb = static_cast<int>(p.blocks().size());
  const Eigen::SparseMatrix<double> aeq = p.EqualityMatrix();
  const Eigen::VectorXd beq = p.EqualityRhs();

  Reduction red = ReduceEqualities(n, aeq, beq);
  if (!red.consistent) {
    sol.status = SolveStatus::kInfeasible;
    sol.message = "inconsistent equality constraints";
    sol.y = red.y0;
    return sol;
  }
  const int k = static_cast<int>(red.Z.cols());

  // [1; y] = Zbar [1; t]
  std::vector<Eigen::Triplet<double>> zt;
  zt.emplace_back(0, 0, 1.0);
  for (int j = 0; j < n; ++j)
    if (red.y0[j] != 0.0) zt.emplace_back(j + 1, 0, red.y0[j]);
  for (int c = 0; c < k; ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(red.Z, c); it; ++it)
      zt.emplace_back(static_cast<int>(it.row()) + 1, c + 1, it.value());
  Eigen::SparseMatrix<double> zbar(n + 1, k + 1);
  zbar.setFromTriplets(zt.begin(), zt.end());

  Eigen::VectorXd ct = red.Z.transpose() * p.objective();
  const double c0 = p.objective().dot(red.y0);

  std::vector<Eigen::SparseMatrix<double>> ft(nb);
  Eigen::VectorXd colnorm2 = Eigen::VectorXd::Zero(k);
  for (int b = 0; b < nb; ++b) {
    ft[b] = p.BlockMap(b) * zbar;
    const double mx = ft[b].nonZeros() ? Eigen::VectorXd(ft[b].coeffs()).cwiseAbs().maxCoeff() : 0.0;
    ft[b].prune(1e-14 * std::max(1.0, mx), 1.0);
    const bool psd = p.blocks()[b].kind == LmiProblem::BlockKind::kPsd;
    for (int c = 1; c <= k; ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(ft[b], c); it; ++it) {
        int i = 0, j = 0;
        if (psd) PackedToIJ(static_cast<int>(it.row()), i, j);
        colnorm2[c - 1] += (i == j ? 1.0 : 2.0) * it.value() * it.value();
      }
  }

  // Active columns, scaled to unit norm.
  std::vector<int> active;
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(k);
  for (int c = 0; c < k; ++c) {
    if (colnorm2[c] > 0) {
      active.push_back(c);
      scale[c] = 1.0 / std::sqrt(colnorm2[c]);
    } else if (std::abs(ct[c]) > 1e-12) {
      sol.status = SolveStatus::kNumericalFailure;
      sol.message = "objective unbounded along an unconstrained direction";
      sol.y = red.y0;
      return sol;
    }
  }
  const int m = static_cast<int>(active.size());
  Eigen::SparseMatrix<double> sel(k + 1, m);
  {
    std::vector<Eigen::Triplet<double>> st;
    for (int q = 0; q < m; ++q) st.emplace_back(active[q] + 1, q, -scale[active[q]]);
    sel.setFromTriplets(st.begin(), st.end());
  }
  std::vector<CoreBlock> core(nb);
  for (int b = 0; b < nb; ++b) {
    const auto& bl = p.blocks()[b];
    core[b].n = bl.size;
    core[b].diag = bl.kind == LmiProblem::BlockKind::kNonneg;
    core[b].A = ft[b] * sel;
    core[b].A.makeCompressed();
    Eigen::VectorXd c0v = ft[b].col(0);
    core[b].C = core[b].diag ? Eigen::MatrixXd(c0v) : Unpack(c0v, bl.size);
  }
  Eigen::VectorXd bcore(m);
  for (int q = 0; q < m; ++q) bcore[q] = ct[active[q]] * scale[active[q]];

  auto to_y = [&](const Eigen::VectorXd& tc) {
    Eigen::VectorXd tt = Eigen::VectorXd::Zero(k);
    for (int q = 0; q < m; ++q) tt[active[q]] = tc[q] * scale[active[q]];
    return Eigen::VectorXd(red.y0 + red.Z * tt);
  };
  auto min_eig = [&](const Eigen::VectorXd& y) {
    double lmin = std::numeric_limits<double>::infinity();
    for (int b = 0; b < nb; ++b) {
      Eigen::MatrixXd f = p.EvaluateBlock(b, y);
      if (f.size() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f, Eigen::EigenvaluesOnly);
      lmin = std::min(lmin, es.eigenvalues().minCoeff());
    }
    return lmin;
  };

  CoreResult cr;
  if (m == 0) {
    cr.t.resize(0);
    cr.converged = min_eig(to_y(cr.t)) >= -opts.psd_tol;
    cr.lmi_infeasible = !cr.converged;
  } else {
    cr = SolveCore(core, bcore, opts, [&](const Eigen::VectorXd& tc) {
      return min_eig(to_y(tc)) >= -opts.psd_tol;
    });
  }
  sol.iterations = cr.iterations;
  sol.gap_history = cr.history;
  sol.primal_residual = cr.pinf;
  sol.dual_residual = cr.dinf;
  sol.gap = cr.gap;
  sol.message = cr.message;
  sol.y = cr.t.size() == m ? to_y(cr.t) : red.y0;
  sol.objective = p.objective().dot(sol.y);
  (void)c0;
  sol.equality_residual = aeq.rows() ? (aeq * sol.y - beq).cwiseAbs().maxCoeff() : 0.0;
  sol.blocks.resize(nb);
  sol.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int b = 0; b < nb; ++b) {
    sol.blocks[b] = p.EvaluateBlock(b, sol.y);
    if (sol.blocks[b].size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.blocks[b], Eigen::EigenvaluesOnly);
    sol.min_eigenvalue = std::min(sol.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  const bool self_ok = sol.min_eigenvalue >= -opts.psd_tol &&
                       sol.equality_residual <= 1e-7 * (1.0 + beq.lpNorm<Eigen::Infinity>());
  if (cr.converged && self_ok) {
    sol.status = SolveStatus::kOptimal;
  } else if (cr.lmi_infeasible) {
    sol.status = SolveStatus::kInfeasible;
  } else if (cr.unbounded || cr.failure) {
    sol.status = self_ok ? SolveStatus::kFeasible : SolveStatus::kNumericalFailure;
    if (sol.message.empty()) sol.message = "unbounded objective";
  } else if (self_ok) {
    sol.status = SolveStatus::kFeasible;
    if (sol.message.empty()) sol.message = "iteration limit before optimality";
  } else if (cr.dinf > 1e3 * opts.feas_tol) {
    sol.status = SolveStatus::kInfeasible;
    sol.message = "dual residual stagnation";
  } else {
    sol.status = SolveStatus::kNumericalFailure;
    if (sol.message.empty()) sol.message = "no certified iterate";
  }
  return sol;
}

}  // namespace certnet
