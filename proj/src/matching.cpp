#include "graphot/matching.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace graphot {

namespace {

// Dinic max-flow on source -> left (cap 1) -> right (cap 1) -> sink (cap b).
class Dinic {
 public:
  explicit Dinic(int nodes) : head_(nodes, -1), level_(nodes), it_(nodes) {}

  void add(int u, int v, int cap) {
    arcs_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, head_[v], 0});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  long run(int s, int t) {
    long flow = 0;
    while (bfs(s, t)) {
      it_ = head_;
      while (int f = dfs(s, t, std::numeric_limits<int>::max())) flow += f;
    }
    return flow;
  }

  struct Arc {
    int to;
    int next;
    int cap;
  };
  const std::vector<Arc>& arcs() const { return arcs_; }
  int head(int u) const { return head_[u]; }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next)
        if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
    }
    return level_[t] >= 0;
  }

  // iterative augmenting-path search in the level graph
  int dfs(int s, int t, int limit) {
    std::vector<int> stack{};
    std::vector<int> via;
    int u = s;
    while (true) {
      if (u == t) {
        int f = limit;
        for (int a : via) f = std::min(f, arcs_[a].cap);
        for (int a : via) {
          arcs_[a].cap -= f;
          arcs_[a ^ 1].cap += f;
        }
        return f;
      }
      int& a = it_[u];
      while (a >= 0 && !(arcs_[a].cap > 0 && level_[arcs_[a].to] == level_[u] + 1)) a = arcs_[a].next;
      if (a >= 0) {
        via.push_back(a);
        stack.push_back(u);
        u = arcs_[a].to;
      } else {
        if (stack.empty()) return 0;
        level_[u] = -1;  // dead end
        u = stack.back();
        stack.pop_back();
        via.pop_back();
      }
    }
  }

  std::vector<int> head_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

BottleneckAssignment bottleneck_assignment(const std::vector<TorusPoint>& left,
                                           const std::vector<TorusPoint>& right, int capacity) {
  const int m = static_cast<int>(left.size());
  const int n = static_cast<int>(right.size());
  if (capacity < 1 || static_cast<long>(capacity) * n != m)
    throw std::invalid_argument("bottleneck_assignment: left size must equal capacity * right size");
  BottleneckAssignment out;
  if (m == 0) return out;

  std::vector<double> dist(static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) dist[static_cast<size_t>(i) * n + j] = torus_distance(left[i], right[j]);

  // every left point needs some partner and every right point needs
  // `capacity` of them, which bounds the threshold from below
  double lower = 0.0;
  for (int i = 0; i < m; ++i)
    lower = std::max(lower, *std::min_element(dist.begin() + static_cast<long>(i) * n,
                                              dist.begin() + static_cast<long>(i + 1) * n));
  std::vector<double> column(m);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) column[i] = dist[static_cast<size_t>(i) * n + j];
    std::nth_element(column.begin(), column.begin() + (capacity - 1), column.end());
    lower = std::max(lower, column[capacity - 1]);
  }
  std::vector<double> cand;
  for (double d : dist)
    if (d >= lower) cand.push_back(d);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  const int source = m + n, sink = m + n + 1;
  auto test = [&](double t, std::vector<int>* owner) {
    ++out.feasibility_tests;
    Dinic flow(m + n + 2);
    // arcs are added in reverse so adjacency lists iterate in lexicographic order
    for (int j = n - 1; j >= 0; --j) flow.add(m + j, sink, capacity);
    for (int i = m - 1; i >= 0; --i) {
      for (int j = n - 1; j >= 0; --j)
        if (dist[static_cast<size_t>(i) * n + j] <= t) flow.add(i, m + j, 1);
      flow.add(source, i, 1);
    }
    const bool ok = flow.run(source, sink) == m;
    if (ok && owner) {
      owner->assign(m, -1);
      for (int i = 0; i < m; ++i)
        for (int a = flow.head(i); a >= 0; a = flow.arcs()[a].next) {
          const auto& arc = flow.arcs()[a];
          if (arc.to >= m && arc.to < m + n && arc.cap == 0 && (a % 2 == 0)) {
            (*owner)[i] = arc.to - m;
            break;
          }
        }
    }
    return ok;
  };

  // galloping search for a feasible index, then bisection
  long lo = -1, hi = 0, step = 1;
  const long last = static_cast<long>(cand.size()) - 1;
  while (!test(cand[hi], nullptr)) {
    lo = hi;
    if (hi == last) throw std::logic_error("bottleneck_assignment: no feasible threshold");
    hi = std::min(last, hi + step);
    step *= 2;
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (test(cand[mid], nullptr))
      hi = mid;
    else
      lo = mid;
  }
  test(cand[hi], &out.owner);
  for (int i = 0; i < m; ++i) out.delta = std::max(out.delta, dist[static_cast<size_t>(i) * n + out.owner[i]]);
  return out;
}

}  // namespace graphot
