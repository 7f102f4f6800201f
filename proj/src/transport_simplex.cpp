#include "graphot/transport_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace graphot {

namespace {

struct Arc {
  int tail;
  int head;
  double flow;
  double cost;
  bool real;  // false for the artificial arcs through the root
};

// Spanning-tree basis over rows 0..m-1, columns m..m+k-1 and an artificial
// root m+k. Rows ship to columns along real arcs; the starting tree ships
// every row's supply to the root and every column's demand from it. That
// tree is strongly feasible, and the leaving-arc rule below keeps it so,
// which rules out cycling on degenerate pivots.
class SimplexState {
 public:
  SimplexState(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& c)
      : c_(c), m_(static_cast<int>(a.size())), k_(static_cast<int>(b.size())), root_(m_ + k_) {
    const int nodes = m_ + k_ + 1;
    adj_.resize(nodes);
    parent_.resize(nodes);
    parent_arc_.resize(nodes);
    depth_.resize(nodes);
    pot_.resize(nodes);
    big_ = (c.cwiseAbs().maxCoeff() + 1.0) * nodes;
    for (int i = 0; i < m_; ++i) add_arc({i, root_, a[i], big_, false});
    for (int j = 0; j < k_; ++j) add_arc({root_, m_ + j, b[j], big_, false});
  }

  void add_arc(Arc arc) {
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back(arc);
    adj_[arc.tail].push_back(id);
    adj_[arc.head].push_back(id);
  }

  // potentials with zero reduced cost c - pi(tail) + pi(head) on tree arcs
  void compute_tree() {
    std::fill(depth_.begin(), depth_.end(), -1);
    queue_.clear();
    queue_.push_back(root_);
    depth_[root_] = 0;
    parent_[root_] = -1;
    parent_arc_[root_] = -1;
    pot_[root_] = 0.0;
    for (size_t h = 0; h < queue_.size(); ++h) {
      const int x = queue_[h];
      for (int id : adj_[x]) {
        const Arc& arc = arcs_[id];
        const int y = arc.tail == x ? arc.head : arc.tail;
        if (depth_[y] >= 0) continue;
        depth_[y] = depth_[x] + 1;
        parent_[y] = x;
        parent_arc_[y] = id;
        pot_[y] = arc.tail == x ? pot_[x] - arc.cost : pot_[x] + arc.cost;
        queue_.push_back(y);
      }
    }
  }

  double reduced(int i, int j) const { return c_(i, j) - pot_[i] + pot_[m_ + j]; }
  double artificial_cost() const { return big_; }

  // Block pricing; returns false when no cell has negative reduced cost.
  bool price(double tol, int& ei, int& ej) {
    const long total = static_cast<long>(m_) * k_;
    const long block = std::max<long>(std::min<long>(total, 64), static_cast<long>(std::sqrt(double(total))));
    double best = -tol;
    ei = -1;
    long scanned = 0;
    while (scanned < total) {
      const long stop = std::min(total, scanned + block);
      for (; scanned < stop; ++scanned) {
        const long q = cursor_;
        cursor_ = (cursor_ + 1 == total) ? 0 : cursor_ + 1;
        const int i = static_cast<int>(q / k_), j = static_cast<int>(q % k_);
        const double r = reduced(i, j);
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
        }
      }
      if (ei >= 0) return true;
    }
    return false;
  }

  // Pivot on the arc row ei -> column ej.
  void pivot(int ei, int ej) {
    const int first = ei, second = m_ + ej;
    int x = first, y = second;
    while (x != y) {
      if (depth_[x] >= depth_[y])
        x = parent_[x];
      else
        y = parent_[y];
    }
    const int apex = x;
    // The cycle runs first -> second along the new arc, up from `second` to
    // the apex, then down to `first`. Arcs traversed against their direction
    // lose flow; the last such arc with minimal flow (seen from the apex) leaves.
    double delta = std::numeric_limits<double>::infinity();
    int leave_node = -1;
    for (int v = first; v != apex; v = parent_[v]) {
      const Arc& arc = arcs_[parent_arc_[v]];
      if (arc.tail == v && arc.flow < delta) {
        delta = arc.flow;
        leave_node = v;
      }
    }
    for (int v = second; v != apex; v = parent_[v]) {
      const Arc& arc = arcs_[parent_arc_[v]];
      if (arc.head == v && arc.flow <= delta) {
        delta = arc.flow;
        leave_node = v;
      }
    }
    delta = std::max(0.0, delta);
    for (int v = first; v != apex; v = parent_[v]) {
      Arc& arc = arcs_[parent_arc_[v]];
      arc.flow += arc.tail == v ? -delta : delta;
    }
    for (int v = second; v != apex; v = parent_[v]) {
      Arc& arc = arcs_[parent_arc_[v]];
      arc.flow += arc.head == v ? -delta : delta;
    }
    const int id = parent_arc_[leave_node];
    auto drop = [&](int node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), id));
    };
    drop(arcs_[id].tail);
    drop(arcs_[id].head);
    arcs_[id] = {first, second, delta, c_(ei, ej), true};
    adj_[first].push_back(id);
    adj_[second].push_back(id);
  }

  const std::vector<Arc>& arcs() const { return arcs_; }
  int rows() const { return m_; }

 private:
  const Eigen::MatrixXd& c_;
  int m_, k_, root_;
  double big_ = 0.0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_arc_, depth_, queue_;
  std::vector<double> pot_;
  long cursor_ = 0;
};

}  // namespace

TransportPlan solve_transportation(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                   const Eigen::MatrixXd& cost, double balance_tol) {
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw std::invalid_argument("solve_transportation: cost matrix shape does not match marginals");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw std::invalid_argument("solve_transportation: negative mass");
  const double sa = supply.sum(), sb = demand.sum();
  if (std::abs(sa - sb) > balance_tol * std::max(1.0, std::max(sa, sb)))
    throw UnbalancedMassError("unbalanced masses: " + std::to_string(sa) + " vs " + std::to_string(sb));

  // zero-mass atoms never carry flow
  std::vector<int> rows, cols;
  for (Eigen::Index i = 0; i < supply.size(); ++i)
    if (supply[i] > 0.0) rows.push_back(static_cast<int>(i));
  for (Eigen::Index j = 0; j < demand.size(); ++j)
    if (demand[j] > 0.0) cols.push_back(static_cast<int>(j));
  TransportPlan plan;
  if (rows.empty() || cols.empty()) {
    plan.audit_ok = true;
    return plan;
  }
  const int m = static_cast<int>(rows.size()), k = static_cast<int>(cols.size());
  Eigen::VectorXd a(m), b(k);
  Eigen::MatrixXd c(m, k);
  for (int i = 0; i < m; ++i) a[i] = supply[rows[i]];
  for (int j = 0; j < k; ++j) b[j] = demand[cols[j]];
  b *= a.sum() / b.sum();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) c(i, j) = cost(rows[i], cols[j]);

  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  SimplexState state(a, b, c);
  // potentials carry the artificial cost as an offset; allow for its rounding
  const double tol = 1e-12 * scale + 64.0 * std::numeric_limits<double>::epsilon() * state.artificial_cost();
  const long max_pivots = 200L * (m + k) + 100000L;
  int ei = 0, ej = 0;
  long it = 0;
  for (; it < max_pivots; ++it) {
    state.compute_tree();
    if (!state.price(tol, ei, ej)) break;
    state.pivot(ei, ej);
  }
  plan.iterations = static_cast<int>(it);

  // audit on the final basis
  state.compute_tree();
  double min_rc = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) min_rc = std::min(min_rc, state.reduced(i, j));
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(m), col_sum = Eigen::VectorXd::Zero(k);
  double min_flow = 0.0;
  for (const auto& arc : state.arcs()) {
    min_flow = std::min(min_flow, arc.flow);
    if (!arc.real) continue;
    const int i = arc.tail, j = arc.head - m;
    row_sum[i] += arc.flow;
    col_sum[j] += arc.flow;
    if (arc.flow > 0.0) {
      plan.cost += arc.flow * c(i, j);
      plan.entries.push_back({rows[i], cols[j], arc.flow});
    }
  }
  plan.min_reduced_cost = min_rc;
  plan.marginal_error = std::max((row_sum - a).cwiseAbs().maxCoeff(), (col_sum - b).cwiseAbs().maxCoeff());
  plan.audit_ok = min_rc >= -1e-9 * scale - tol && plan.marginal_error <= 1e-9 && min_flow >= -1e-12;
  std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& x, const PlanEntry& y) {
    return std::tie(x.source, x.target) < std::tie(y.source, y.target);
  });
  return plan;
}

}  // namespace graphot
