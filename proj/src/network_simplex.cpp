// Primal network simplex for the uncapacitated bipartite transportation
// problem. The spanning-tree bookkeeping (parent / pred / thread / rev_thread /
// succ_num / last_succ) follows the classic LEMON layout, specialized to:
//   * implicit complete bipartite arc set, arc e = i * m + j,
//   * no capacities, so non-tree arcs always sit at flow 0 and only tree arcs
//     carry flow (stored per child node),
//   * real-valued supplies.
// Strongly feasible trees are maintained through the leaving-arc tie rule,
// which rules out cycling under any entering rule.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"
#include "srwrate/ot.hpp"

namespace srwrate {

namespace {

constexpr int kUp = 1;
constexpr int kDown = -1;

}  // namespace

struct TransportSimplex::Impl {
  ExactOtOptions opts;
  Vector mu_full, nu_full;
  std::vector<Eigen::Index> src_index;  // compressed source -> original row
  std::vector<Eigen::Index> snk_index;  // compressed sink   -> original col

  std::int64_t n = 0, m = 0;      // compressed sizes
  std::int64_t node_num = 0;      // n + m
  std::int64_t root = 0;          // == node_num
  std::int64_t arc_num = 0;       // n * m real arcs; artificial arc of node u is arc_num + u

  std::vector<double> cost;       // real arc costs for the current solve
  double art_cost = 0.0;
  std::vector<double> supply;
  std::vector<int> art_dir;       // kUp: u -> root, kDown: root -> u

  std::vector<std::int64_t> parent, pred, thread, rev_thread, succ_num, last_succ;
  std::vector<int> pred_dir;
  std::vector<double> pi, pred_flow;
  std::vector<std::int64_t> dirty_revs;

  bool initialized = false;
  std::size_t total_pivots = 0;
  std::int64_t next_arc = 0;
  std::int64_t block_size = 0;

  // pivot state
  std::int64_t in_arc = -1, join = -1, u_in = -1, v_in = -1, u_out = -1, v_out = -1;
  double delta = 0.0;

  std::int64_t source_of(std::int64_t e) const {
    if (e < arc_num) return e / m;
    const std::int64_t u = e - arc_num;
    return art_dir[static_cast<std::size_t>(u)] == kUp ? u : root;
  }
  std::int64_t target_of(std::int64_t e) const {
    if (e < arc_num) return n + e % m;
    const std::int64_t u = e - arc_num;
    return art_dir[static_cast<std::size_t>(u)] == kUp ? root : u;
  }
  double cost_of(std::int64_t e) const {
    if (e < arc_num) return cost[static_cast<std::size_t>(e)];
    return art_dir[static_cast<std::size_t>(e - arc_num)] == kUp ? 0.0 : art_cost;
  }

  void setup(Vector mu_w, Vector nu_w) {
    mu_full = std::move(mu_w);
    nu_full = std::move(nu_w);
    for (Eigen::Index i = 0; i < mu_full.size(); ++i) {
      if (mu_full[i] > 0.0) src_index.push_back(i);
    }
    for (Eigen::Index j = 0; j < nu_full.size(); ++j) {
      if (nu_full[j] > 0.0) snk_index.push_back(j);
    }
    n = static_cast<std::int64_t>(src_index.size());
    m = static_cast<std::int64_t>(snk_index.size());
    node_num = n + m;
    root = node_num;
    arc_num = n * m;

    // Rescale sinks so both sides carry the same total in long double.
    long double s_mu = 0.0L, s_nu = 0.0L;
    for (auto i : src_index) s_mu += mu_full[i];
    for (auto j : snk_index) s_nu += nu_full[j];
    const long double scale = s_mu / s_nu;

    supply.assign(static_cast<std::size_t>(node_num + 1), 0.0);
    for (std::int64_t i = 0; i < n; ++i) supply[i] = mu_full[src_index[i]];
    for (std::int64_t j = 0; j < m; ++j) {
      supply[n + j] = -static_cast<double>(nu_full[snk_index[j]] * scale);
    }
    long double total = 0.0L;
    for (std::int64_t u = 0; u < node_num; ++u) total += supply[u];
    supply[root] = -static_cast<double>(total);

    const auto sz = static_cast<std::size_t>(node_num + 1);
    parent.assign(sz, -1);
    pred.assign(sz, -1);
    thread.assign(sz, 0);
    rev_thread.assign(sz, 0);
    succ_num.assign(sz, 0);
    last_succ.assign(sz, 0);
    pred_dir.assign(sz, 0);
    pi.assign(sz, 0.0);
    pred_flow.assign(sz, 0.0);
    art_dir.assign(static_cast<std::size_t>(node_num), kUp);

    block_size = std::max<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(arc_num)))), 10);
  }

  void init_tree() {
    parent[root] = -1;
    pred[root] = -1;
    thread[root] = 0;
    rev_thread[0] = root;
    succ_num[root] = node_num + 1;
    last_succ[root] = root - 1;
    pi[root] = 0.0;
    for (std::int64_t u = 0; u < node_num; ++u) {
      parent[u] = root;
      pred[u] = arc_num + u;
      thread[u] = u + 1;
      rev_thread[u + 1] = u;
      succ_num[u] = 1;
      last_succ[u] = u;
      if (supply[u] >= 0.0) {
        art_dir[u] = kUp;
        pred_dir[u] = kUp;
        pred_flow[u] = supply[u];
      } else {
        art_dir[u] = kDown;
        pred_dir[u] = kDown;
        pred_flow[u] = -supply[u];
      }
    }
    initialized = true;
  }

  // pi[u] = pi[parent] - dir * cost(pred), in thread (preorder) order.
  void compute_potentials() {
    pi[root] = 0.0;
    for (std::int64_t u = thread[root]; u != root; u = thread[u]) {
      pi[u] = pi[parent[u]] - pred_dir[u] * cost_of(pred[u]);
    }
  }

  double reduced_cost(std::int64_t e) const {
    return cost[static_cast<std::size_t>(e)] + pi[e / m] - pi[n + e % m];
  }

  bool find_entering_block(double eps) {
    double best = -eps;
    std::int64_t cnt = block_size;
    std::int64_t found = -1;
    for (std::int64_t k = 0; k < arc_num; ++k) {
      std::int64_t e = next_arc + k;
      if (e >= arc_num) e -= arc_num;
      const double c = reduced_cost(e);
      if (c < best) {
        best = c;
        found = e;
      }
      if (--cnt == 0) {
        if (found >= 0) {
          next_arc = e + 1 == arc_num ? 0 : e + 1;
          in_arc = found;
          return true;
        }
        cnt = block_size;
      }
    }
    if (found >= 0) {
      in_arc = found;
      return true;
    }
    return false;
  }

  bool find_entering_bland(double eps) {
    for (std::int64_t e = 0; e < arc_num; ++e) {
      if (reduced_cost(e) < -eps) {
        in_arc = e;
        return true;
      }
    }
    return false;
  }

  void find_join_node() {
    std::int64_t u = source_of(in_arc), v = target_of(in_arc);
    while (u != v) {
      if (succ_num[u] < succ_num[v]) {
        u = parent[u];
      } else {
        v = parent[v];
      }
    }
    join = u;
  }

  // Entering arcs are at their lower bound, so the cycle is oriented along
  // in_arc. On the source side flow decreases on up-arcs, on the target side
  // on down-arcs. Strict/non-strict comparisons pick the last blocking arc
  // in cycle order, which keeps the tree strongly feasible.
  bool find_leaving_arc() {
    const std::int64_t first = source_of(in_arc);
    const std::int64_t second = target_of(in_arc);
    delta = std::numeric_limits<double>::infinity();
    int result = 0;
    for (std::int64_t u = first; u != join; u = parent[u]) {
      if (pred_dir[u] == kUp && pred_flow[u] < delta) {
        delta = pred_flow[u];
        u_out = u;
        result = 1;
      }
    }
    for (std::int64_t u = second; u != join; u = parent[u]) {
      if (pred_dir[u] == kDown && pred_flow[u] <= delta) {
        delta = pred_flow[u];
        u_out = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in = first;
      v_in = second;
    } else {
      u_in = second;
      v_in = first;
    }
    return result != 0;
  }

  void change_flow() {
    if (delta > 0.0) {
      for (std::int64_t u = source_of(in_arc); u != join; u = parent[u]) {
        pred_flow[u] -= pred_dir[u] * delta;
      }
      for (std::int64_t u = target_of(in_arc); u != join; u = parent[u]) {
        pred_flow[u] += pred_dir[u] * delta;
      }
    }
    // The leaving arc ends at exactly zero: x - x == 0 in floating point.
    pred_flow[u_out] = 0.0;
  }

  void update_tree_structure() {
    const std::int64_t old_rev_thread = rev_thread[u_out];
    const std::int64_t old_succ_num = succ_num[u_out];
    const std::int64_t old_last_succ = last_succ[u_out];
    v_out = parent[u_out];
    const double in_flow = delta;

    if (u_in == u_out) {
      parent[u_in] = v_in;
      pred[u_in] = in_arc;
      pred_dir[u_in] = u_in == source_of(in_arc) ? kUp : kDown;
      pred_flow[u_in] = in_flow;

      if (thread[v_in] != u_out) {
        std::int64_t after = thread[old_last_succ];
        thread[old_rev_thread] = after;
        rev_thread[after] = old_rev_thread;
        after = thread[v_in];
        thread[v_in] = u_out;
        rev_thread[u_out] = v_in;
        thread[old_last_succ] = after;
        rev_thread[after] = old_last_succ;
      }
    } else {
      // When old_rev_thread == v_in, join and v_out coincide.
      const std::int64_t thread_continue =
          old_rev_thread == v_in ? thread[old_last_succ] : thread[v_in];

      // Re-hang the stem u_in ... u_out, splicing each subtree into the thread.
      std::int64_t stem = u_in;
      std::int64_t par_stem = v_in;
      std::int64_t next_stem;
      std::int64_t last = last_succ[u_in];
      std::int64_t before;
      std::int64_t after = thread[last];
      thread[v_in] = u_in;
      dirty_revs.clear();
      dirty_revs.push_back(v_in);
      while (stem != u_out) {
        next_stem = parent[stem];
        thread[last] = next_stem;
        dirty_revs.push_back(last);

        before = rev_thread[stem];
        thread[before] = after;
        rev_thread[after] = before;

        parent[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;

        last = last_succ[stem] == last_succ[par_stem] ? rev_thread[par_stem] : last_succ[stem];
        after = thread[last];
      }
      parent[u_out] = par_stem;
      thread[last] = thread_continue;
      rev_thread[thread_continue] = last;
      last_succ[u_out] = last;

      if (old_rev_thread != v_in) {
        thread[old_rev_thread] = after;
        rev_thread[after] = old_rev_thread;
      }

      for (const std::int64_t u : dirty_revs) rev_thread[thread[u]] = u;

      // Reverse pred/pred_dir/flow along the stem and fix succ_num/last_succ.
      std::int64_t tmp_sc = 0;
      const std::int64_t tmp_ls = last_succ[u_out];
      for (std::int64_t u = u_out, p = parent[u]; u != u_in; u = p, p = parent[u]) {
        pred[u] = pred[p];
        pred_dir[u] = -pred_dir[p];
        pred_flow[u] = pred_flow[p];
        tmp_sc += succ_num[u] - succ_num[p];
        succ_num[u] = tmp_sc;
        last_succ[p] = tmp_ls;
      }
      pred[u_in] = in_arc;
      pred_dir[u_in] = u_in == source_of(in_arc) ? kUp : kDown;
      pred_flow[u_in] = in_flow;
      succ_num[u_in] = old_succ_num;
    }

    const std::int64_t up_limit_out = last_succ[join] == v_in ? join : -1;
    const std::int64_t last_succ_out = last_succ[u_out];
    for (std::int64_t u = v_in; u != -1 && last_succ[u] == v_in; u = parent[u]) {
      last_succ[u] = last_succ_out;
    }

    if (join != old_rev_thread && v_in != old_rev_thread) {
      for (std::int64_t u = v_out; u != up_limit_out && last_succ[u] == old_last_succ;
           u = parent[u]) {
        last_succ[u] = old_rev_thread;
      }
    } else if (last_succ_out != old_last_succ) {
      for (std::int64_t u = v_out; u != up_limit_out && last_succ[u] == old_last_succ;
           u = parent[u]) {
        last_succ[u] = last_succ_out;
      }
    }

    for (std::int64_t u = v_in; u != join; u = parent[u]) succ_num[u] += old_succ_num;
    for (std::int64_t u = v_out; u != join; u = parent[u]) succ_num[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi[v_in] - pi[u_in] - pred_dir[u_in] * cost_of(in_arc);
    const std::int64_t end = thread[last_succ[u_in]];
    for (std::int64_t u = u_in; u != end; u = thread[u]) pi[u] += sigma;
  }

  OtSolution solve(const CostMatrix& c) {
    if (c.rows() != mu_full.size() || c.cols() != nu_full.size()) {
      throw InvalidArgument("cost matrix is " + std::to_string(c.rows()) + "x" +
                            std::to_string(c.cols()) + " but marginals have lengths " +
                            std::to_string(mu_full.size()) + " and " +
                            std::to_string(nu_full.size()));
    }
    validate_cost(c);

    cost.resize(static_cast<std::size_t>(arc_num));
    double max_cost = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < m; ++j) {
        const double v = c.entries(src_index[i], snk_index[j]);
        cost[static_cast<std::size_t>(i * m + j)] = v;
        max_cost = std::max(max_cost, v);
      }
    }
    art_cost = (max_cost + 1.0) * static_cast<double>(node_num);

    if (!initialized) init_tree();
    compute_potentials();

    const double eps = 1e-13 * (1.0 + max_cost);
    const std::size_t limit =
        opts.max_pivots > 0
            ? opts.max_pivots
            : std::max<std::size_t>(1'000'000, 200 * static_cast<std::size_t>(arc_num + node_num));
    std::size_t pivots = 0;

    // Pivot until pricing finds nothing, then re-derive potentials from the
    // tree and price once more; accumulated round-off in incremental
    // potential updates cannot fake optimality.
    for (int round = 0; round < 8; ++round) {
      while (opts.pivot == PivotRule::Bland ? find_entering_bland(eps) : find_entering_block(eps)) {
        if (++pivots > limit) {
          throw NumericalError("network simplex exceeded " + std::to_string(limit) + " pivots");
        }
        find_join_node();
        if (!find_leaving_arc()) throw NumericalError("transport LP reported unbounded");
        change_flow();
        update_tree_structure();
        update_potential();
      }
      compute_potentials();
      const bool clean = opts.pivot == PivotRule::Bland ? !find_entering_bland(eps)
                                                        : !find_entering_block(eps);
      if (clean) break;
    }
    total_pivots += pivots;

    return extract(c, max_cost);
  }

  OtSolution extract(const CostMatrix& c, double max_cost) const {
    // Complementary slackness certificate: dual feasibility on every real arc
    // and no flow left on artificial arcs.
    const double cert_tol = 1e-9 * (1.0 + max_cost);
    double worst = 0.0;
    for (std::int64_t e = 0; e < arc_num; ++e) worst = std::min(worst, reduced_cost(e));
    if (worst < -cert_tol) {
      throw NumericalError("transport solution failed dual feasibility check (reduced cost " +
                           format_double(worst) + ")");
    }

    std::vector<PlanEntry> entries;
    entries.reserve(static_cast<std::size_t>(node_num));
    double objective = 0.0;
    for (std::int64_t u = 0; u < node_num; ++u) {
      const std::int64_t e = pred[u];
      const double f = pred_flow[u];
      if (e >= arc_num) {
        if (f > 1e-9) throw NumericalError("transport problem infeasible: artificial flow remains");
        continue;
      }
      if (f <= 0.0) continue;
      const Eigen::Index row = src_index[static_cast<std::size_t>(e / m)];
      const Eigen::Index col = snk_index[static_cast<std::size_t>(e % m)];
      entries.push_back({row, col, f});
      objective += f * c.entries(row, col);
    }
    std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    Coupling plan(std::move(entries), mu_full, nu_full);
    plan.check_marginals(1e-9);
    return {std::move(plan), objective};
  }
};

TransportSimplex::TransportSimplex(Vector mu_w, Vector nu_w, ExactOtOptions opts)
    : impl_(std::make_unique<Impl>()) {
  auto check = [](const Vector& w, const char* name) {
    if (w.size() == 0) throw InvalidArgument(std::string(name) + " weights are empty");
    if (!w.allFinite() || (w.array() < 0.0).any()) {
      throw InvalidArgument(std::string(name) + " weights must be finite and nonnegative");
    }
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < w.size(); ++i) s += w[i];
    if (std::abs(static_cast<double>(s - 1.0L)) > 1e-9) {
      throw InvalidArgument(std::string(name) + " weights sum to " +
                            format_double(static_cast<double>(s)) + ", not 1");
    }
  };
  check(mu_w, "source");
  check(nu_w, "target");
  impl_->opts = opts;
  impl_->setup(std::move(mu_w), std::move(nu_w));
}

TransportSimplex::~TransportSimplex() = default;
TransportSimplex::TransportSimplex(TransportSimplex&&) noexcept = default;
TransportSimplex& TransportSimplex::operator=(TransportSimplex&&) noexcept = default;

OtSolution TransportSimplex::solve(const CostMatrix& cost) { return impl_->solve(cost); }

std::size_t TransportSimplex::pivots() const noexcept { return impl_->total_pivots; }

OtSolution solve_exact_ot(const CostMatrix& cost, const Vector& mu_w, const Vector& nu_w,
                          const ExactOtOptions& opts) {
  if (cost.rows() != mu_w.size() || cost.cols() != nu_w.size()) {
    throw InvalidArgument("cost matrix shape does not match the weight vectors");
  }
  TransportSimplex solver(mu_w, nu_w, opts);
  return solver.solve(cost);
}

}  // namespace srwrate
