#include "srw_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <utility>
#include <vector>

#include "srwrate/errors.hpp"

namespace srwrate::detail {

namespace {

constexpr Eigen::Index kFullPlanMax = 1600;
constexpr int kMaxRounds = 60;
constexpr std::size_t kPerLine = 3;  // priced edges added per row and column

struct Edge {
  Eigen::Index i;
  Eigen::Index j;
};

// One positive-semidefinite block. Its constraint rows are the svec rows of
// the matrix equation, with coefficient `sign`.
struct SdpBlock {
  double sign = 1.0;
  Matrix c;
  Matrix x;
  Matrix s;
};

struct IpmOutput {
  Vector plan;  // per edge
  Vector f, g;  // marginal duals (g of the last column is 0)
  Matrix omega;
  int iterations = 0;
};

// Epigraph form of min_pi topk(V_pi) over couplings supported on `edges`,
// in indices of the positive-weight atoms a (rows) and b (columns).
class RestrictedIpm {
 public:
  RestrictedIpm(const Matrix& x, const Vector& a, const Matrix& y, const Vector& b,
                std::vector<Edge> edges, int k, double target);
  IpmOutput run();

 private:
  Eigen::Index svec(Eigen::Index p, Eigen::Index q) const {
    if (p > q) std::swap(p, q);
    return q * (q + 1) / 2 + p;
  }
  Matrix smat(const Vector& ysdp) const;
  Vector apply_a(const Vector& xlp, const std::vector<Matrix>& xs) const;
  Vector apply_at(const Vector& y) const;
  Matrix schur(const Vector& w, const std::vector<Matrix>& winv) const;
  static double max_step(const Vector& x, const Vector& dx);
  double max_step(const Matrix& x, const Matrix& dx) const;

  std::vector<Edge> edges_;
  int k_;
  double target_;
  Eigen::Index dim_, n_, m_, n_marg_, n_sdp_, n_eq_, n_edges_;
  Matrix a_sdp_;  // n_sdp x n_edges: -svec(d d^T)
  Vector b_, c_lp_;
  Vector x_, s_, y_;
  std::vector<SdpBlock> blocks_;
};

RestrictedIpm::RestrictedIpm(const Matrix& x, const Vector& a, const Matrix& y, const Vector& b,
                             std::vector<Edge> edges, int k, double target)
    : edges_(std::move(edges)), k_(k), target_(target), dim_(x.cols()), n_(x.rows()), m_(y.rows()) {
  n_marg_ = n_ + m_ - 1;
  n_sdp_ = dim_ * (dim_ + 1) / 2;
  n_eq_ = n_marg_ + n_sdp_;
  n_edges_ = static_cast<Eigen::Index>(edges_.size());

  a_sdp_.resize(n_sdp_, n_edges_);
  for (Eigen::Index e = 0; e < n_edges_; ++e) {
    const Vector d = (x.row(edges_[e].i) - y.row(edges_[e].j)).transpose();
    for (Eigen::Index q = 0; q < dim_; ++q) {
      for (Eigen::Index p = 0; p <= q; ++p) a_sdp_(svec(p, q), e) = -d[p] * d[q];
    }
  }
  b_ = Vector::Zero(n_eq_);
  b_.head(n_) = a;
  b_.segment(n_, m_ - 1) = b.head(m_ - 1);
  c_lp_ = Vector::Zero(n_edges_ + 1);
  c_lp_[n_edges_] = static_cast<double>(k);

  SdpBlock slack;
  slack.sign = -1.0;
  slack.c = Matrix::Zero(dim_, dim_);
  blocks_.push_back(slack);
  if (k > 1) {
    SdpBlock top;
    top.sign = 1.0;
    top.c = Matrix::Identity(dim_, dim_);
    blocks_.push_back(top);
  }
}

Matrix RestrictedIpm::smat(const Vector& ysdp) const {
  Matrix out(dim_, dim_);
  for (Eigen::Index q = 0; q < dim_; ++q) {
    for (Eigen::Index p = 0; p <= q; ++p) {
      const double v = ysdp[svec(p, q)];
      out(p, q) = out(q, p) = p == q ? v : 0.5 * v;
    }
  }
  return out;
}

Vector RestrictedIpm::apply_a(const Vector& xlp, const std::vector<Matrix>& xs) const {
  Vector out = Vector::Zero(n_eq_);
  for (Eigen::Index e = 0; e < n_edges_; ++e) {
    out[edges_[e].i] += xlp[e];
    if (edges_[e].j + 1 < m_) out[n_ + edges_[e].j] += xlp[e];
  }
  out.tail(n_sdp_).noalias() += a_sdp_ * xlp.head(n_edges_);
  for (Eigen::Index p = 0; p < dim_; ++p) out[n_marg_ + svec(p, p)] += xlp[n_edges_];
  for (std::size_t blk = 0; blk < blocks_.size(); ++blk) {
    for (Eigen::Index q = 0; q < dim_; ++q) {
      for (Eigen::Index p = 0; p <= q; ++p) {
        out[n_marg_ + svec(p, q)] += blocks_[blk].sign * xs[blk](p, q);
      }
    }
  }
  return out;
}

Vector RestrictedIpm::apply_at(const Vector& y) const {
  Vector out(n_edges_ + 1);
  out.head(n_edges_).noalias() = a_sdp_.transpose() * y.tail(n_sdp_);
  for (Eigen::Index e = 0; e < n_edges_; ++e) {
    out[e] += y[edges_[e].i];
    if (edges_[e].j + 1 < m_) out[e] += y[n_ + edges_[e].j];
  }
  double z = 0.0;
  for (Eigen::Index p = 0; p < dim_; ++p) z += y[n_marg_ + svec(p, p)];
  out[n_edges_] = z;
  return out;
}

Matrix RestrictedIpm::schur(const Vector& w, const std::vector<Matrix>& winv) const {
  Matrix m = Matrix::Zero(n_eq_, n_eq_);
  // Marginal rows are sparse: two nonzeros per edge.
  for (Eigen::Index e = 0; e < n_edges_; ++e) {
    const Eigen::Index r = edges_[e].i;
    const bool has_c = edges_[e].j + 1 < m_;
    const Eigen::Index c = n_ + edges_[e].j;
    m(r, r) += w[e];
    if (has_c) {
      m(c, c) += w[e];
      m(r, c) += w[e];
      m(c, r) += w[e];
    }
    m.block(n_marg_, r, n_sdp_, 1).noalias() += w[e] * a_sdp_.col(e);
    if (has_c) m.block(n_marg_, c, n_sdp_, 1).noalias() += w[e] * a_sdp_.col(e);
  }
  m.block(0, n_marg_, n_marg_, n_sdp_) = m.block(n_marg_, 0, n_sdp_, n_marg_).transpose();

  const Matrix scaled = a_sdp_ * w.head(n_edges_).cwiseSqrt().asDiagonal();
  Matrix mss = Matrix::Zero(n_sdp_, n_sdp_);
  mss.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  mss = mss.selfadjointView<Eigen::Lower>();
  for (Eigen::Index p = 0; p < dim_; ++p) {
    for (Eigen::Index q = 0; q < dim_; ++q) mss(svec(p, p), svec(q, q)) += w[n_edges_];
  }
  // tr(E_pq X E_rs W) with E_pq = (e_p e_q^T + e_q e_p^T) / 2.
  for (std::size_t blk = 0; blk < blocks_.size(); ++blk) {
    const Matrix& x = blocks_[blk].x;
    const Matrix& wi = winv[blk];
    for (Eigen::Index q = 0; q < dim_; ++q) {
      for (Eigen::Index p = 0; p <= q; ++p) {
        const Eigen::Index u = svec(p, q);
        for (Eigen::Index s = 0; s < dim_; ++s) {
          for (Eigen::Index r = 0; r <= s; ++r) {
            mss(u, svec(r, s)) += 0.25 * (x(q, r) * wi(s, p) + x(q, s) * wi(r, p) +
                                          x(p, r) * wi(s, q) + x(p, s) * wi(r, q));
          }
        }
      }
    }
  }
  m.block(n_marg_, n_marg_, n_sdp_, n_sdp_) = 0.5 * (mss + mss.transpose());
  return m;
}

double RestrictedIpm::max_step(const Vector& x, const Vector& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) alpha = std::min(alpha, -x[i] / dx[i]);
  }
  return alpha;
}

double RestrictedIpm::max_step(const Matrix& x, const Matrix& dx) const {
  const Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(dim_, dim_));
  Matrix t = l_inv * dx * l_inv.transpose();
  t = (0.5 * (t + t.transpose())).eval();
  const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(t, Eigen::EigenvaluesOnly).eigenvalues()[0];
  return lo < 0.0 ? -1.0 / lo : std::numeric_limits<double>::infinity();
}

IpmOutput RestrictedIpm::run() {
  const Eigen::Index n_lp = n_edges_ + 1;
  const double nu_cone = static_cast<double>(n_lp) + static_cast<double>(dim_ * blocks_.size());
  x_ = Vector::Ones(n_lp);
  s_ = Vector::Ones(n_lp);
  y_ = Vector::Zero(n_eq_);
  for (auto& blk : blocks_) {
    blk.x = Matrix::Identity(dim_, dim_);
    blk.s = Matrix::Identity(dim_, dim_);
  }
  const double b_norm = 1.0 + b_.norm();
  const double c_norm = 1.0 + c_lp_.norm() + std::sqrt(static_cast<double>(dim_));

  auto mu_of = [&](const Vector& x, const Vector& s, const std::vector<Matrix>& xs,
                   const std::vector<Matrix>& ss) {
    double v = x.dot(s);
    for (std::size_t b = 0; b < xs.size(); ++b) v += xs[b].cwiseProduct(ss[b]).sum();
    return v / nu_cone;
  };

  // Iterates can degrade once the residuals reach rounding level, so the best
  // one seen (by max of the three residuals) is what gets returned.
  struct Snapshot {
    Vector x, s, y;
    std::vector<SdpBlock> blocks;
  };
  Snapshot best{x_, s_, y_, blocks_};
  double best_merit = INFINITY;

  IpmOutput out;
  for (out.iterations = 0; out.iterations < 100; ++out.iterations) {
    std::vector<Matrix> xs, ss, winv;
    for (const auto& blk : blocks_) {
      xs.push_back(blk.x);
      ss.push_back(blk.s);
      winv.push_back(blk.s.inverse());
    }
    const Vector rp = b_ - apply_a(x_, xs);
    const Matrix ymat = smat(y_.tail(n_sdp_));
    const Vector rd_lp = c_lp_ - apply_at(y_) - s_;
    std::vector<Matrix> rd;
    for (const auto& blk : blocks_) rd.push_back(blk.c - blk.sign * ymat - blk.s);

    double pobj = c_lp_.dot(x_);
    const double dobj = b_.dot(y_);
    for (const auto& blk : blocks_) pobj += blk.c.cwiseProduct(blk.x).sum();
    double rd_norm2 = rd_lp.squaredNorm();
    for (const auto& r : rd) rd_norm2 += r.squaredNorm();
    const double pinf = rp.norm() / b_norm;
    const double dinf = std::sqrt(rd_norm2) / c_norm;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double merit = std::max({pinf, dinf, gap});
    if (merit < best_merit) {
      best_merit = merit;
      best = {x_, s_, y_, blocks_};
    }
    if (merit <= target_) break;
    const double mu = mu_of(x_, s_, xs, ss);

    const Vector w = x_.cwiseQuotient(s_);
    const Eigen::LDLT<Matrix> llt(schur(w, winv));
    if (llt.info() != Eigen::Success) break;

    // Newton direction for complementarity target sigma_mu, optionally with the
    // second-order correction from a predictor direction.
    struct Dir {
      Vector dx, dy, ds;
      std::vector<Matrix> dxm, dsm;
    };
    auto direction = [&](double sigma_mu, const Dir* corr) {
      Vector tx = sigma_mu * s_.cwiseInverse() - x_ - w.cwiseProduct(rd_lp);
      if (corr != nullptr) tx -= corr->dx.cwiseProduct(corr->ds).cwiseQuotient(s_);
      std::vector<Matrix> txm;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const Matrix g = blocks_[b].x * rd[b] * winv[b];
        Matrix t = sigma_mu * winv[b] - blocks_[b].x - 0.5 * (g + g.transpose());
        if (corr != nullptr) {
          const Matrix h = corr->dxm[b] * corr->dsm[b] * winv[b];
          t -= 0.5 * (h + h.transpose());
        }
        txm.push_back(t);
      }
      Dir d;
      d.dy = llt.solve(rp - apply_a(tx, txm));
      d.ds = rd_lp - apply_at(d.dy);
      d.dx = tx - w.cwiseProduct(d.ds - rd_lp);
      const Matrix dymat = smat(d.dy.tail(n_sdp_));
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        Matrix dsb = rd[b] - blocks_[b].sign * dymat;
        dsb = (0.5 * (dsb + dsb.transpose())).eval();
        const Matrix g = blocks_[b].x * dsb * winv[b];
        Matrix dxb = sigma_mu * winv[b] - blocks_[b].x - 0.5 * (g + g.transpose());
        if (corr != nullptr) {
          const Matrix h = corr->dxm[b] * corr->dsm[b] * winv[b];
          dxb -= 0.5 * (h + h.transpose());
        }
        d.dxm.push_back(0.5 * (dxb + dxb.transpose()));
        d.dsm.push_back(dsb);
      }
      return d;
    };
    auto steps = [&](const Dir& d) {
      double ap = max_step(x_, d.dx), ad = max_step(s_, d.ds);
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        ap = std::min(ap, max_step(blocks_[b].x, d.dxm[b]));
        ad = std::min(ad, max_step(blocks_[b].s, d.dsm[b]));
      }
      return std::pair{ap, ad};
    };

    const Dir pred = direction(0.0, nullptr);
    auto [ap, ad] = steps(pred);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    std::vector<Matrix> xa, sa;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      xa.push_back(blocks_[b].x + ap * pred.dxm[b]);
      sa.push_back(blocks_[b].s + ad * pred.dsm[b]);
    }
    const double mu_aff = mu_of(x_ + ap * pred.dx, s_ + ad * pred.ds, xa, sa);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    const Dir d = direction(sigma * mu, &pred);
    std::tie(ap, ad) = steps(d);
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);
    if (!(ap > 1e-8) || !(ad > 1e-8)) break;

    x_ += ap * d.dx;
    s_ += ad * d.ds;
    y_ += ad * d.dy;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      blocks_[b].x += ap * d.dxm[b];
      blocks_[b].s += ad * d.dsm[b];
    }
    if (!x_.allFinite() || !y_.allFinite()) throw NumericalError("interior point iterate is not finite");
  }

  x_ = std::move(best.x);
  s_ = std::move(best.s);
  y_ = std::move(best.y);
  blocks_ = std::move(best.blocks);
  out.plan = x_.head(n_edges_);
  out.f = y_.head(n_);
  out.g = Vector::Zero(m_);
  out.g.head(m_ - 1) = y_.segment(n_, m_ - 1);
  out.omega = smat(y_.tail(n_sdp_));
  return out;
}

// Rounds a nonnegative near-coupling onto the transport polytope: scale rows
// and columns down onto the marginals, then spread the deficit rank-one.
Matrix round_to_polytope(Matrix plan, const Vector& a, const Vector& b) {
  plan = plan.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    const double s = plan.row(i).sum();
    if (s > a[i]) plan.row(i) *= a[i] / s;
  }
  for (Eigen::Index j = 0; j < plan.cols(); ++j) {
    const double s = plan.col(j).sum();
    if (s > b[j]) plan.col(j) *= b[j] / s;
  }
  const Vector er = (a - plan.rowwise().sum()).cwiseMax(0.0);
  const Vector ec = (b - plan.colwise().sum().transpose()).cwiseMax(0.0);
  const double deficit = er.sum();
  if (deficit > 0.0) plan.noalias() += er * ec.transpose() / deficit;
  return plan;
}

std::vector<Edge> support(const Coupling& plan, const std::vector<Eigen::Index>& row_pos,
                          const std::vector<Eigen::Index>& col_pos) {
  std::vector<Edge> out;
  for (const auto& e : plan.entries()) {
    if (row_pos[e.row] >= 0 && col_pos[e.col] >= 0) out.push_back({row_pos[e.row], col_pos[e.col]});
  }
  return out;
}

}  // namespace

SrwResult srw_interior_point(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int k,
                             const SrwOptions& opts) {
  const Eigen::Index dim = mu.dim();
  std::vector<Eigen::Index> rows, cols;
  std::vector<Eigen::Index> row_pos(static_cast<std::size_t>(mu.size()), -1);
  std::vector<Eigen::Index> col_pos(static_cast<std::size_t>(nu.size()), -1);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu.weights()[i] > 0.0) {
      row_pos[i] = static_cast<Eigen::Index>(rows.size());
      rows.push_back(i);
    }
  }
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    if (nu.weights()[j] > 0.0) {
      col_pos[j] = static_cast<Eigen::Index>(cols.size());
      cols.push_back(j);
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(cols.size());
  Matrix x(n, dim), y(m, dim);
  Vector a(n), b(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = mu.points().row(rows[i]);
    a[i] = mu.weights()[rows[i]];
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    y.row(j) = nu.points().row(cols[j]);
    b[j] = nu.weights()[cols[j]];
  }
  const double target = std::min(opts.tol, 1e-8) * 1e-3;

  // Edge set: everything for small plans; otherwise start from the W2 plan and
  // the OT plan along its top displacement directions, and grow it by pricing
  // against the restricted duals.
  std::vector<Edge> edges;
  std::vector<char> in_set(static_cast<std::size_t>(n * m), 0);
  auto add = [&](const Edge& e) {
    char& flag = in_set[static_cast<std::size_t>(e.i * m + e.j)];
    if (!flag) {
      flag = 1;
      edges.push_back(e);
    }
  };
  const bool full = n * m <= kFullPlanMax;
  if (full) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) add({i, j});
    }
  } else {
    const OtSolution w2 = solve_exact_ot(squared_euclidean_cost(mu, nu), mu.weights(), nu.weights());
    for (const auto& e : support(w2.plan, row_pos, col_pos)) add(e);
    const TopK top = topk_eigensum(displacement_second_moment(mu, nu, w2.plan), k);
    const OtSolution proj =
        solve_exact_ot(projected_squared_cost(mu, nu, top.basis), mu.weights(), nu.weights());
    for (const auto& e : support(proj.plan, row_pos, col_pos)) add(e);
    // A star through atom 0 on each side keeps the edge graph connected, so
    // the restricted marginal constraints have full row rank.
    for (Eigen::Index i = 0; i < n; ++i) add({i, 0});
    for (Eigen::Index j = 0; j < m; ++j) add({0, j});
  }

  IpmOutput ipm;
  int total_iters = 0;
  for (int round = 0; round < kMaxRounds; ++round) {
    ipm = RestrictedIpm(x, a, y, b, edges, k, target).run();
    total_iters += ipm.iterations;
    if (full) break;
    // Reduced costs d^T Omega d - f_i - g_j over all pairs.
    const Matrix xo = x * ipm.omega;
    const Vector xx = xo.cwiseProduct(x).rowwise().sum();
    const Vector yy = (y * ipm.omega).cwiseProduct(y).rowwise().sum();
    Matrix rc = -2.0 * xo * y.transpose();
    rc.colwise() += xx - ipm.f;
    rc.rowwise() += (yy - ipm.g).transpose();
    const double tol_rc = 1e-9 * (1.0 + rc.cwiseAbs().maxCoeff());
    std::size_t added = 0;
    auto try_add = [&](Eigen::Index i, Eigen::Index j) {
      if (rc(i, j) < -tol_rc && !in_set[static_cast<std::size_t>(i * m + j)]) {
        add({i, j});
        ++added;
      }
    };
    std::vector<Eigen::Index> order;
    for (Eigen::Index i = 0; i < n; ++i) {
      order.resize(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      const auto take = std::min<std::size_t>(kPerLine, order.size());
      std::partial_sort(order.begin(), order.begin() + take, order.end(),
                        [&](Eigen::Index p, Eigen::Index q) { return rc(i, p) < rc(i, q); });
      for (std::size_t t = 0; t < take; ++t) try_add(i, order[t]);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      order.resize(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      const auto take = std::min<std::size_t>(kPerLine, order.size());
      std::partial_sort(order.begin(), order.begin() + take, order.end(),
                        [&](Eigen::Index p, Eigen::Index q) { return rc(p, j) < rc(q, j); });
      for (std::size_t t = 0; t < take; ++t) try_add(order[t], j);
    }
    if (added == 0) break;
  }

  Matrix dense = Matrix::Zero(n, m);
  for (std::size_t e = 0; e < edges.size(); ++e) dense(edges[e].i, edges[e].j) = ipm.plan[e];
  dense = round_to_polytope(std::move(dense), a, b);
  std::vector<PlanEntry> entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (dense(i, j) > 0.0) entries.push_back({rows[i], cols[j], dense(i, j)});
    }
  }

  SrwResult out;
  out.k = k;
  out.iterations = total_iters;
  out.coupling = Coupling(std::move(entries), mu.weights(), nu.weights());
  out.coupling.check_marginals(1e-9);
  auto eig = jacobi_eigen(displacement_second_moment(mu, nu, out.coupling));
  TopK top = topk_eigensum(eig, k);

  // Certified lower bound: clip the dual matrix into {0 <= Omega <= I,
  // tr Omega <= k} and solve one exact OT problem with its quadratic form.
  // The resulting vertex is also a candidate primal point.
  const Eigen::SelfAdjointEigenSolver<Matrix> omega(0.5 * (ipm.omega + ipm.omega.transpose()));
  Vector lam = omega.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  if (lam.sum() > k) lam *= static_cast<double>(k) / lam.sum();
  double lower = 0.0;
  if (lam.maxCoeff() > 0.0) {
    const Matrix factor = omega.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    OtSolution vertex =
        solve_exact_ot(factored_quadratic_cost(mu, nu, factor), mu.weights(), nu.weights());
    lower = vertex.objective;
    auto veig = jacobi_eigen(displacement_second_moment(mu, nu, vertex.plan));
    TopK vtop = topk_eigensum(veig, k);
    if (vtop.value < top.value) {
      out.coupling = std::move(vertex.plan);
      top = std::move(vtop);
    }
  }

  const double upper = std::max(top.value, 0.0);
  if (top.value <= 0.0) {
    out.distance = 0.0;
    out.witness_basis = Matrix::Identity(dim, k);
  } else {
    out.distance = std::sqrt(upper);
    out.witness_basis = top.basis;
  }
  out.lower_bound = std::min(lower, upper);
  out.fw_gap = upper - out.lower_bound;
  out.converged = out.fw_gap <= opts.tol * std::max(1.0, upper);
  if (!std::isfinite(out.distance) || !std::isfinite(out.fw_gap)) {
    throw NumericalError("interior point produced a non-finite result");
  }
  return out;
}

}  // namespace srwrate::detail
