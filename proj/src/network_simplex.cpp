#include "lsicert/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lsicert {

namespace {

constexpr int kStateTree = 0;
constexpr int kStateLower = 1;
constexpr int kDirUp = 1;     // tree arc points from the node to its parent
constexpr int kDirDown = -1;

class Solver {
 public:
  Solver(const Vector& a, const Vector& b, const Matrix& C)
      : ns_(static_cast<int>(a.size())), nt_(static_cast<int>(b.size())) {
    node_num_ = ns_ + nt_;
    arc_num_ = static_cast<std::int64_t>(ns_) * nt_;
    all_arc_num_ = arc_num_ + node_num_;
    root_ = node_num_;
    const auto A = static_cast<std::size_t>(all_arc_num_);
    const auto N = static_cast<std::size_t>(node_num_ + 1);
    flow_.assign(A, 0.0);
    state_.assign(A, static_cast<std::int8_t>(kStateLower));
    art_cost_.assign(static_cast<std::size_t>(node_num_), 0.0);
    art_source_.assign(static_cast<std::size_t>(node_num_), 0);
    art_target_.assign(static_cast<std::size_t>(node_num_), 0);
    parent_.assign(N, -1);
    pred_.assign(N, -1);
    thread_.assign(N, 0);
    rev_thread_.assign(N, 0);
    succ_num_.assign(N, 0);
    last_succ_.assign(N, 0);
    pred_dir_.assign(N, 0);
    pi_.assign(N, 0.0);

    // Arc e = i * nt + j; costs stored in arc order for the pricing scan.
    cost_.resize(static_cast<std::size_t>(arc_num_));
    max_cost_ = 0.0;
    for (int i = 0; i < ns_; ++i) {
      for (int j = 0; j < nt_; ++j) {
        const double c = C(i, j);
        cost_[static_cast<std::size_t>(i) * nt_ + j] = c;
        max_cost_ = std::max(max_cost_, std::abs(c));
      }
    }
    const double art = (max_cost_ + 1.0) * node_num_;
    eps_ = 1e-12 * std::max(max_cost_, 1e-300);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;
    for (int u = 0; u < node_num_; ++u) {
      const std::int64_t e = arc_num_ + u;
      const double supply = u < ns_ ? a[u] : -b[u - ns_];
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[static_cast<std::size_t>(e)] = kStateTree;
      if (supply >= 0.0) {
        pred_dir_[u] = kDirUp;
        pi_[u] = 0.0;
        art_source_[u] = u;
        art_target_[u] = root_;
        flow_[static_cast<std::size_t>(e)] = supply;
        art_cost_[u] = 0.0;
      } else {
        pred_dir_[u] = kDirDown;
        pi_[u] = art;
        art_source_[u] = root_;
        art_target_[u] = u;
        flow_[static_cast<std::size_t>(e)] = -supply;
        art_cost_[u] = art;
      }
    }
    block_size_ = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_num_))));
  }

  std::int64_t run(std::int64_t max_pivots) {
    std::int64_t pivots = 0;
    while (find_entering_arc()) {
      if (++pivots > max_pivots) throw SolverError("network simplex pivot limit reached", static_cast<double>(pivots));
      find_join_node();
      find_leaving_arc();
      if (!(delta_ < std::numeric_limits<double>::infinity())) throw SolverError("unbounded transport problem", 0.0);
      change_flow();
      update_tree_structure();
      update_potential();
    }
    return pivots;
  }

  double flow(std::int64_t e) const { return flow_[static_cast<std::size_t>(e)]; }
  double pi(int u) const { return pi_[u]; }

 private:
  int source(std::int64_t e) const {
    return e < arc_num_ ? static_cast<int>(e / nt_) : art_source_[static_cast<std::size_t>(e - arc_num_)];
  }
  int target(std::int64_t e) const {
    return e < arc_num_ ? ns_ + static_cast<int>(e % nt_) : art_target_[static_cast<std::size_t>(e - arc_num_)];
  }
  double cost(std::int64_t e) const {
    return e < arc_num_ ? cost_[static_cast<std::size_t>(e)] : art_cost_[static_cast<std::size_t>(e - arc_num_)];
  }

  // Block search over the real arcs.
  bool find_entering_arc() {
    double min = -eps_;
    std::int64_t cnt = block_size_;
    bool found = false;
    std::int64_t e = next_arc_;
    auto scan = [&](std::int64_t from, std::int64_t to) {
      for (e = from; e != to; ++e) {
        const int i = static_cast<int>(e / nt_);
        const int j = static_cast<int>(e % nt_);
        const double c = state_[static_cast<std::size_t>(e)] * (cost_[static_cast<std::size_t>(e)] + pi_[i] - pi_[ns_ + j]);
        if (c < min) {
          min = c;
          in_arc_ = e;
          found = true;
        }
        if (--cnt == 0) {
          if (found) {
            ++e;
            return true;
          }
          cnt = block_size_;
        }
      }
      return false;
    };
    if (scan(next_arc_, arc_num_) || scan(0, next_arc_) || found) {
      next_arc_ = e == arc_num_ ? 0 : e;
      return found;
    }
    return false;
  }

  void find_join_node() {
    int u = source(in_arc_), v = target(in_arc_);
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  void find_leaving_arc() {
    int first, second;
    if (state_[static_cast<std::size_t>(in_arc_)] == kStateLower) {
      first = source(in_arc_);
      second = target(in_arc_);
    } else {
      first = target(in_arc_);
      second = source(in_arc_);
    }
    const double inf = std::numeric_limits<double>::infinity();
    delta_ = inf;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      if (pred_dir_[u] == kDirDown) continue;  // flow on this arc increases
      const double d = std::max(0.0, flow_[static_cast<std::size_t>(pred_[u])]);
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      if (pred_dir_[u] == kDirUp) continue;
      const double d = std::max(0.0, flow_[static_cast<std::size_t>(pred_[u])]);
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
  }

  void change_flow() {
    if (delta_ > 0.0) {
      const double val = state_[static_cast<std::size_t>(in_arc_)] * delta_;
      flow_[static_cast<std::size_t>(in_arc_)] += val;
      for (int u = source(in_arc_); u != join_; u = parent_[u]) flow_[static_cast<std::size_t>(pred_[u])] -= pred_dir_[u] * val;
      for (int u = target(in_arc_); u != join_; u = parent_[u]) flow_[static_cast<std::size_t>(pred_[u])] += pred_dir_[u] * val;
    }
    state_[static_cast<std::size_t>(in_arc_)] = kStateTree;
    const auto out = static_cast<std::size_t>(pred_[u_out_]);
    flow_[out] = 0.0;
    state_[out] = kStateLower;
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int next_stem;
      int last = last_succ_[u_in_];
      int before, after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);
        before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;
        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;
        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;
      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost(in_arc_);
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int ns_, nt_;
  std::vector<double> cost_;
  int node_num_ = 0;
  std::int64_t arc_num_ = 0, all_arc_num_ = 0;
  int root_ = 0;
  double max_cost_ = 0.0, eps_ = 0.0;
  std::int64_t block_size_ = 10, next_arc_ = 0;

  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<double> art_cost_;
  std::vector<int> art_source_, art_target_;
  std::vector<int> parent_, thread_, rev_thread_, succ_num_, last_succ_, pred_dir_;
  std::vector<std::int64_t> pred_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;

  std::int64_t in_arc_ = 0;
  int join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  double delta_ = 0.0;
};

}  // namespace

NetworkSimplexResult network_simplex(const Vector& a, const Vector& b, const Matrix& C,
                                     std::int64_t max_pivots) {
  require(C.rows() == a.size() && C.cols() == b.size(), "cost matrix shape does not match the marginals");
  require(a.size() > 0 && b.size() > 0, "marginals must be nonempty");
  require(C.allFinite(), "costs must be finite");
  const std::int64_t arcs = static_cast<std::int64_t>(a.size()) * b.size();
  if (max_pivots <= 0) max_pivots = std::max<std::int64_t>(1000000, 50 * arcs);

  Solver s(a, b, C);
  NetworkSimplexResult r;
  r.pivots = s.run(max_pivots);

  const int ns = static_cast<int>(a.size()), nt = static_cast<int>(b.size());
  r.plan.resize(ns, nt);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) r.plan(i, j) = std::max(0.0, s.flow(static_cast<std::int64_t>(i) * nt + j));
  for (int u = 0; u < ns + nt; ++u) r.artificial_flow += std::abs(s.flow(arcs + u));
  r.u.resize(ns);
  r.v.resize(nt);
  for (int i = 0; i < ns; ++i) r.u[i] = -s.pi(i);
  for (int j = 0; j < nt; ++j) r.v[j] = s.pi(ns + j);
  // Shift so the potentials are centered; the dual value is unchanged when
  // both marginals carry the same mass.
  const double shift = r.u.size() ? r.u.mean() : 0.0;
  r.u.array() -= shift;
  r.v.array() += shift;
  r.primal = (r.plan.array() * C.array()).sum();
  r.dual = a.dot(r.u) + b.dot(r.v);
  double minrc = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < ns; ++i) minrc = std::min(minrc, C(i, j) - r.u[i] - r.v[j]);
  r.min_reduced_cost = minrc;
  return r;
}

}  // namespace lsicert
