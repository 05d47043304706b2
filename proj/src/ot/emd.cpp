#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "otfs/error.hpp"
#include "otfs/ot_core.hpp"

namespace otfs::ot {
namespace {

void check_problem(const Matrix& cost, const Vector& mu, const Vector& nu) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size()) {
    throw InvalidArgument("emd_exact: cost is " + std::to_string(cost.rows()) + "x" +
                          std::to_string(cost.cols()) + " but marginals have sizes " +
                          std::to_string(mu.size()) + " and " + std::to_string(nu.size()));
  }
  if (mu.size() == 0 || nu.size() == 0) throw InvalidArgument("emd_exact: empty marginal");
  auto check_weights = [](const Vector& w, const char* name) {
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      if (!std::isfinite(w(k)) || w(k) < 0.0) {
        throw InvalidArgument(std::string("emd_exact: ") + name + " has a negative or non-finite weight");
      }
    }
    if (std::abs(w.sum() - 1.0) > 1e-9) {
      throw InvalidArgument(std::string("emd_exact: ") + name + " does not sum to 1");
    }
  };
  check_weights(mu, "mu");
  check_weights(nu, "nu");
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
      if (!std::isfinite(cost(i, j))) throw InvalidArgument("emd_exact: non-finite cost entry");
      if (cost(i, j) < 0.0) throw InvalidArgument("emd_exact: negative cost entry");
    }
  }
}

// Basis of the transportation polytope kept as a spanning tree over
// row nodes [0, na) and column nodes [na, na + nb).
class TransportSimplex {
 public:
  TransportSimplex(const Matrix& cost, const Vector& mu, const Vector& nu)
      : cost_(cost),
        na_(static_cast<int>(cost.rows())),
        nb_(static_cast<int>(cost.cols())),
        adj_(na_ + nb_),
        u_(Vector::Zero(na_)),
        v_(Vector::Zero(nb_)),
        parent_node_(na_ + nb_),
        parent_arc_(na_ + nb_),
        depth_(na_ + nb_) {
    northwest_corner(mu, nu);
    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    eps_ = 1e-12 * scale;
    const long long cells = static_cast<long long>(na_) * nb_;
    block_ = std::max<long long>(64, static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(cells)))));
    max_pivots_ = 50 * static_cast<std::size_t>(cells) + 10000;
  }

  void solve() {
    int degenerate_run = 0;
    const int degenerate_limit = na_ + nb_;
    for (;;) {
      build_tree();
      int ei = -1;
      int ej = -1;
      const bool found = degenerate_run > degenerate_limit ? price_bland(ei, ej) : price_block(ei, ej);
      if (!found) return;
      if (++pivots_ > max_pivots_) throw SolverError("emd_exact: pivot limit exceeded");
      const double theta = pivot(ei, ej);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }
  }

  EmdResult result(const Vector& mu, const Vector& nu) const {
    EmdResult out;
    out.plan.coupling = Matrix::Zero(na_, nb_);
    out.plan.row_marginal = mu;
    out.plan.col_marginal = nu;
    double value = 0.0;
    for (const Arc& a : arcs_) {
      out.plan.coupling(a.row, a.col) = a.flow;
      value += cost_(a.row, a.col) * a.flow;
    }
    out.value = std::max(0.0, value);
    out.row_potential = u_;
    out.col_potential = v_;
    out.pivots = pivots_;
    return out;
  }

 private:
  struct Arc {
    int row;
    int col;
    double flow;
  };

  void add_arc(int row, int col, double flow) {
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back({row, col, flow});
    adj_[row].push_back(id);
    adj_[na_ + col].push_back(id);
  }

  // Staircase start: always na + nb - 1 arcs, possibly some at zero flow.
  void northwest_corner(const Vector& mu, const Vector& nu) {
    arcs_.reserve(na_ + nb_ - 1);
    double supply = mu(0);
    double demand = nu(0);
    int i = 0;
    int j = 0;
    for (;;) {
      const double x = std::min(supply, demand);
      add_arc(i, j, std::max(0.0, x));
      if (i == na_ - 1 && j == nb_ - 1) break;
      supply -= x;
      demand -= x;
      if (i == na_ - 1) {
        demand = nu(++j);
      } else if (j == nb_ - 1) {
        supply = mu(++i);
      } else if (supply <= demand) {
        supply = mu(++i);
      } else {
        demand = nu(++j);
      }
    }
  }

  void build_tree() {
    std::fill(depth_.begin(), depth_.end(), -1);
    std::vector<int> queue;
    queue.reserve(na_ + nb_);
    queue.push_back(0);
    depth_[0] = 0;
    parent_node_[0] = -1;
    parent_arc_[0] = -1;
    u_(0) = 0.0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int x = queue[head];
      for (int id : adj_[x]) {
        const Arc& a = arcs_[id];
        const int y = x < na_ ? na_ + a.col : a.row;
        if (depth_[y] >= 0) continue;
        depth_[y] = depth_[x] + 1;
        parent_node_[y] = x;
        parent_arc_[y] = id;
        if (x < na_) {
          v_(a.col) = cost_(a.row, a.col) - u_(a.row);
        } else {
          u_(a.row) = cost_(a.row, a.col) - v_(a.col);
        }
        queue.push_back(y);
      }
    }
  }

  double reduced_cost(int i, int j) const { return cost_(i, j) - u_(i) - v_(j); }

  bool price_block(int& ei, int& ej) {
    const long long cells = static_cast<long long>(na_) * nb_;
    long long scanned = 0;
    while (scanned < cells) {
      const long long len = std::min(block_, cells - scanned);
      double best = -eps_;
      long long best_k = -1;
      for (long long t = 0; t < len; ++t) {
        long long k = next_ + t;
        if (k >= cells) k -= cells;
        const double rc = reduced_cost(static_cast<int>(k / nb_), static_cast<int>(k % nb_));
        if (rc < best || (rc == best && best_k >= 0 && k < best_k)) {
          best = rc;
          best_k = k;
        }
      }
      next_ = (next_ + len) % cells;
      scanned += len;
      if (best_k >= 0) {
        ei = static_cast<int>(best_k / nb_);
        ej = static_cast<int>(best_k % nb_);
        return true;
      }
    }
    return false;
  }

  bool price_bland(int& ei, int& ej) const {
    for (int i = 0; i < na_; ++i) {
      for (int j = 0; j < nb_; ++j) {
        if (reduced_cost(i, j) < -eps_) {
          ei = i;
          ej = j;
          return true;
        }
      }
    }
    return false;
  }

  // Sends flow around the cycle closed by arc (ei, ej); returns the step size.
  double pivot(int ei, int ej) {
    int x = na_ + ej;
    int y = ei;
    std::vector<int> from_col;
    std::vector<int> from_row;
    while (depth_[x] > depth_[y]) {
      from_col.push_back(parent_arc_[x]);
      x = parent_node_[x];
    }
    while (depth_[y] > depth_[x]) {
      from_row.push_back(parent_arc_[y]);
      y = parent_node_[y];
    }
    while (x != y) {
      from_col.push_back(parent_arc_[x]);
      x = parent_node_[x];
      from_row.push_back(parent_arc_[y]);
      y = parent_node_[y];
    }
    // Cycle order starting at the entering column: arcs alternate -, +, -, ...
    std::vector<int> cycle = std::move(from_col);
    cycle.insert(cycle.end(), from_row.rbegin(), from_row.rend());

    int leaving = -1;
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const Arc& a = arcs_[cycle[k]];
      if (leaving < 0) {
        leaving = cycle[k];
        continue;
      }
      const Arc& l = arcs_[leaving];
      if (a.flow < l.flow || (a.flow == l.flow && (a.row < l.row || (a.row == l.row && a.col < l.col)))) {
        leaving = cycle[k];
      }
    }
    const double theta = arcs_[leaving].flow;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      Arc& a = arcs_[cycle[k]];
      if (k % 2 == 0) {
        a.flow -= theta;
      } else {
        a.flow += theta;
      }
    }

    Arc& out = arcs_[leaving];
    auto unlink = [&](int node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), leaving));
    };
    unlink(out.row);
    unlink(na_ + out.col);
    out = {ei, ej, theta};
    adj_[ei].push_back(leaving);
    adj_[na_ + ej].push_back(leaving);
    return theta;
  }

  const Matrix& cost_;
  int na_;
  int nb_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  Vector u_;
  Vector v_;
  std::vector<int> parent_node_;
  std::vector<int> parent_arc_;
  std::vector<int> depth_;
  double eps_ = 0.0;
  long long block_ = 64;
  long long next_ = 0;
  std::size_t pivots_ = 0;
  std::size_t max_pivots_ = 0;
};

}  // namespace

double TransportPlan::marginal_error() const {
  const double rows = (coupling.rowwise().sum() - row_marginal).cwiseAbs().maxCoeff();
  const double cols = (coupling.colwise().sum().transpose() - col_marginal).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

EmdResult emd_exact(const Matrix& cost, const Vector& mu, const Vector& nu) {
  check_problem(cost, mu, nu);
  TransportSimplex simplex(cost, mu, nu);
  simplex.solve();
  return simplex.result(mu, nu);
}

}  // namespace otfs::ot
