#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "otfs/error.hpp"
#include "otfs/ot_core.hpp"

namespace otfs::ot {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kAbsorbBound = 1e30;
constexpr std::size_t kPositionBudget = std::size_t{1} << 27;  // entries of the p = 1 lookup table

void check_probability(const Vector& w, Eigen::Index n, const char* name) {
  if (w.size() != n) {
    throw InvalidArgument(std::string("entropic_gw: ") + name + " has size " + std::to_string(w.size()) +
                          ", expected " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < 0.0) {
      throw InvalidArgument(std::string("entropic_gw: ") + name + " has a negative or non-finite weight");
    }
  }
  if (std::abs(w.sum() - 1.0) > 1e-9) throw InvalidArgument(std::string("entropic_gw: ") + name + " does not sum to 1");
}

// Linear map plan -> C(plan) with C(i,j) = sum_{k,l} |A(i,k) - B(j,l)|^p plan(k,l),
// where A and B are the metric matrices raised to the power q.
class Contraction {
 public:
  Contraction(Matrix a, Matrix b, double p) : a_(std::move(a)), b_(std::move(b)), p_(p) {
    if (p_ == 1.0) {
      sorted_a_ = sort_rows(a_, order_a_);
      sorted_b_ = sort_rows(b_.transpose(), order_b_);
      build_positions();
    }
  }

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }

  Matrix apply(const Matrix& plan) const {
    if (p_ == 1.0) return apply_abs(plan);
    if (p_ == 2.0) return apply_square(plan);
    return apply_direct(plan);
  }

 private:
  static RowMatrix sort_rows(const Matrix& m, std::vector<std::vector<int>>& order) {
    const Eigen::Index n = m.rows();
    RowMatrix sorted(n, m.cols());
    order.assign(static_cast<std::size_t>(n), {});
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& idx = order[static_cast<std::size_t>(i)];
      idx.resize(static_cast<std::size_t>(m.cols()));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return m(i, x) < m(i, y); });
      for (Eigen::Index k = 0; k < m.cols(); ++k) sorted(i, k) = m(i, idx[static_cast<std::size_t>(k)]);
    }
    return sorted;
  }

  // For every (i, l, j): how many entries of row i of A are below B(j, l). Depends only on the metrics, so it is
  // computed once; skipped when the table would be too large.
  void build_positions() {
    const auto na = static_cast<std::size_t>(a_.rows());
    const auto nb = static_cast<std::size_t>(b_.rows());
    if (na > std::numeric_limits<std::uint16_t>::max() || na * nb * nb > kPositionBudget) return;
    positions_.resize(na * nb * nb);
    for (std::size_t i = 0; i < na; ++i) {
      const double* sa = sorted_a_.data() + static_cast<Eigen::Index>(i * na);
      for (std::size_t l = 0; l < nb; ++l) {
        const double* sb = sorted_b_.data() + static_cast<Eigen::Index>(l * nb);
        const auto& order_l = order_b_[l];
        std::uint16_t* out = positions_.data() + (i * nb + l) * nb;
        std::size_t k = 0;
        for (std::size_t t = 0; t < nb; ++t) {
          while (k < na && sa[k] < sb[t]) ++k;
          out[order_l[t]] = static_cast<std::uint16_t>(k);
        }
      }
    }
  }

  // p = 1. For fixed (i, l), g(y) = sum_k |A(i,k) - y| plan(k,l) is piecewise
  // linear in y; with A(i, .) sorted, running mass and moment sums give
  // g(B(j,l)) for every j in O(n).
  Matrix apply_abs(const Matrix& plan) const {
    const Eigen::Index na = a_.rows();
    const Eigen::Index nb = b_.rows();
    const Vector col_mass = plan.colwise().sum().transpose();
    const Matrix col_moment = a_ * plan;  // (i, l) -> sum_k A(i,k) plan(k,l)
    RowMatrix out = RowMatrix::Zero(na, nb);
    for (std::size_t ii = 0; ii < static_cast<std::size_t>(na); ++ii) {
      const auto i = static_cast<Eigen::Index>(ii);
      const auto& order_i = order_a_[ii];
      const double* sa = sorted_a_.data() + i * na;
      double* out_row = out.data() + i * nb;
      std::vector<double> mass(static_cast<std::size_t>(na) + 1);
      std::vector<double> moment(static_cast<std::size_t>(na) + 1);
      for (Eigen::Index l = 0; l < nb; ++l) {
        const double m_tot = col_mass(l);
        const double s_tot = col_moment(i, l);
        if (m_tot == 0.0) continue;
        const double* pl = plan.data() + l * na;
        const double* sb = sorted_b_.data() + l * nb;
        const auto& order_l = order_b_[static_cast<std::size_t>(l)];
        if (!positions_.empty()) {
          double pk = 0.0;
          double sk = 0.0;
          for (Eigen::Index k = 0; k < na; ++k) {
            const double w = pl[order_i[static_cast<std::size_t>(k)]];
            pk += w;
            sk += sa[k] * w;
            mass[static_cast<std::size_t>(k) + 1] = pk;
            moment[static_cast<std::size_t>(k) + 1] = sk;
          }
          const std::uint16_t* pos = positions_.data() + (ii * static_cast<std::size_t>(nb) + static_cast<std::size_t>(l)) *
                                                             static_cast<std::size_t>(nb);
          const double* bl = b_.data() + l * nb;
          for (Eigen::Index j = 0; j < nb; ++j) {
            const std::size_t k = pos[j];
            out_row[j] += bl[j] * (2.0 * mass[k] - m_tot) - (2.0 * moment[k] - s_tot);
          }
          continue;
        }
        Eigen::Index k = 0;
        double pk = 0.0;
        double sk = 0.0;
        for (Eigen::Index t = 0; t < nb; ++t) {
          const double y = sb[t];
          while (k < na && sa[k] < y) {
            const double w = pl[order_i[static_cast<std::size_t>(k)]];
            pk += w;
            sk += sa[k] * w;
            ++k;
          }
          out_row[order_l[static_cast<std::size_t>(t)]] += y * (2.0 * pk - m_tot) - (2.0 * sk - s_tot);
        }
      }
    }
    return Matrix(out.cwiseMax(0.0));
  }

  Matrix apply_square(const Matrix& plan) const {
    const Vector r = plan.rowwise().sum();
    const Vector c = plan.colwise().sum().transpose();
    const Vector left = a_.cwiseProduct(a_) * r;
    const Vector right = b_.cwiseProduct(b_) * c;
    Matrix out = -2.0 * (a_ * plan * b_.transpose());
    out.colwise() += left;
    out.rowwise() += right.transpose();
    return out.cwiseMax(0.0);
  }

  Matrix apply_direct(const Matrix& plan) const {
    const Eigen::Index na = a_.rows();
    const Eigen::Index nb = b_.rows();
    Matrix out = Matrix::Zero(na, nb);
    for (Eigen::Index j = 0; j < nb; ++j) {
      for (Eigen::Index i = 0; i < na; ++i) {
        double sum = 0.0;
        for (Eigen::Index l = 0; l < nb; ++l) {
          for (Eigen::Index k = 0; k < na; ++k) {
            const double w = plan(k, l);
            if (w != 0.0) sum += std::pow(std::abs(a_(i, k) - b_(j, l)), p_) * w;
          }
        }
        out(i, j) = sum;
      }
    }
    return out;
  }

  Matrix a_;
  Matrix b_;
  double p_;
  RowMatrix sorted_a_;
  RowMatrix sorted_b_;
  std::vector<std::vector<int>> order_a_;
  std::vector<std::vector<int>> order_b_;
  std::vector<std::uint16_t> positions_;
};

double inner(const Matrix& x, const Matrix& y) { return x.cwiseProduct(y).sum(); }

// Moves an approximately feasible nonnegative matrix onto the exact marginals:
// shrink rows, shrink columns, then spread the missing mass as a rank-one term.
Matrix round_to_marginals(Matrix plan, const Vector& mu, const Vector& nu) {
  const Vector rows = plan.rowwise().sum();
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    if (rows(i) > mu(i)) plan.row(i) *= mu(i) / rows(i);
  }
  const Vector cols = plan.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < plan.cols(); ++j) {
    if (cols(j) > nu(j)) plan.col(j) *= nu(j) / cols(j);
  }
  const Vector err_r = (mu - plan.rowwise().sum()).cwiseMax(0.0);
  const Vector err_c = (nu - plan.colwise().sum().transpose()).cwiseMax(0.0);
  const double missing = err_r.sum();
  if (missing > 0.0) plan += err_r * err_c.transpose() / missing;
  return plan;
}

// Soft-min update of one dual potential in the log domain: every reduced cost
// stays nonnegative and each positive-mass line sums to its marginal.
void soft_min_rows(const Matrix& cost, const Vector& col_pot, const Vector& mass, double eps, Vector& out) {
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    const Eigen::RowVectorXd r = cost.row(i) - col_pot.transpose();
    const double lo = r.minCoeff();
    if (!(mass(i) > 0.0)) {
      out(i) = lo;
      continue;
    }
    const double s = (-(r.array() - lo) / eps).exp().sum();
    out(i) = lo - eps * std::log(s) + eps * std::log(mass(i));
  }
}

// Entropic transport for a fixed cost, log-stabilized by absorbing large
// scalings into dual potentials. Nonempty f and g warm-start the potentials
// and receive the final ones.
Matrix sinkhorn(const Matrix& cost, const Vector& mu, const Vector& nu, double eps, int max_iter, double tol,
                bool& converged, Vector& f, Vector& g) {
  const Eigen::Index na = cost.rows();
  const Eigen::Index nb = cost.cols();
  Vector alpha(na);
  Vector beta(nb);
  if (f.size() == na && g.size() == nb && f.allFinite() && g.allFinite()) {
    soft_min_rows(cost, g, mu, eps, alpha);
    const Matrix ct = cost.transpose();
    soft_min_rows(ct, alpha, nu, eps, beta);
  } else {
    alpha = cost.rowwise().minCoeff();
    for (Eigen::Index j = 0; j < nb; ++j) beta(j) = (cost.col(j) - alpha).minCoeff();
  }

  auto kernel = [&]() -> Matrix {
    Matrix k = cost;
    k.colwise() -= alpha;
    k.rowwise() -= beta.transpose();
    return (-k / eps).array().exp().matrix();
  };
  Matrix k = kernel();
  Vector u = Vector::Ones(na);
  Vector v = Vector::Ones(nb);
  converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector kv = k * v;
    for (Eigen::Index i = 0; i < na; ++i) u(i) = mu(i) > 0.0 ? mu(i) / kv(i) : 0.0;
    const Vector ku = k.transpose() * u;
    for (Eigen::Index j = 0; j < nb; ++j) v(j) = nu(j) > 0.0 ? nu(j) / ku(j) : 0.0;
    if (!u.allFinite() || !v.allFinite()) break;

    const double big = std::max(u.maxCoeff(), v.maxCoeff());
    if (big > kAbsorbBound) {
      for (Eigen::Index i = 0; i < na; ++i) {
        if (u(i) > 0.0) alpha(i) += eps * std::log(u(i));
        u(i) = mu(i) > 0.0 ? 1.0 : 0.0;
      }
      for (Eigen::Index j = 0; j < nb; ++j) {
        if (v(j) > 0.0) beta(j) += eps * std::log(v(j));
        v(j) = nu(j) > 0.0 ? 1.0 : 0.0;
      }
      k = kernel();
      continue;
    }
    // Columns are exact after the v-update; check the rows.
    const double err = (u.cwiseProduct(k * v) - mu).lpNorm<1>();
    if (err < tol) {
      converged = true;
      break;
    }
  }
  Matrix plan = u.asDiagonal() * k * v.asDiagonal();
  if (!plan.allFinite()) {
    converged = false;
    f.resize(0);
    g.resize(0);
    return mu * nu.transpose();
  }
  f = alpha;
  g = beta;
  for (Eigen::Index i = 0; i < na; ++i) {
    if (u(i) > 0.0) f(i) += eps * std::log(u(i));
  }
  for (Eigen::Index j = 0; j < nb; ++j) {
    if (v(j) > 0.0) g(j) += eps * std::log(v(j));
  }
  return plan;
}

struct Profile {
  std::vector<double> value;   // ascending
  std::vector<double> weight;  // matching weights
};

Profile sorted_profile(const Matrix& m, Eigen::Index i, const Vector& w) {
  const Eigen::Index n = m.cols();
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return m(i, x) < m(i, y); });
  Profile p;
  for (int k : idx) {
    p.value.push_back(m(i, k));
    p.weight.push_back(w(k));
  }
  return p;
}

// W1 between two sorted weighted samples as the integral of |F_a - F_b|.
double profile_distance(const Profile& a, const Profile& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double acc = 0.0;
  double x = std::min(a.value.front(), b.value.front());
  while (i < a.value.size() || j < b.value.size()) {
    const double next = j == b.value.size() || (i < a.value.size() && a.value[i] <= b.value[j]) ? a.value[i] : b.value[j];
    acc += std::abs(fa - fb) * (next - x);
    x = next;
    while (i < a.value.size() && a.value[i] == x) fa += a.weight[i++];
    while (j < b.value.size() && b.value[j] == x) fb += b.weight[j++];
  }
  return acc;
}

// Transport plan for the distance-profile lower bound: the cost of matching
// i to j is W1 between the distributions of A(i, .) under mu and B(j, .) under nu.
Matrix profile_matching_plan(const Matrix& a, const Matrix& b, const Vector& mu, const Vector& nu) {
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  std::vector<Profile> pa(static_cast<std::size_t>(na));
  std::vector<Profile> pb(static_cast<std::size_t>(nb));
  for (Eigen::Index i = 0; i < na; ++i) pa[static_cast<std::size_t>(i)] = sorted_profile(a, i, mu);
  for (Eigen::Index j = 0; j < nb; ++j) pb[static_cast<std::size_t>(j)] = sorted_profile(b, j, nu);
  Matrix cost(na, nb);
  for (std::size_t j = 0; j < static_cast<std::size_t>(nb); ++j) {
    for (Eigen::Index i = 0; i < na; ++i) {
      cost(i, static_cast<Eigen::Index>(j)) = profile_distance(pa[static_cast<std::size_t>(i)], pb[j]);
    }
  }
  return emd_exact(cost, mu, nu).plan.coupling;
}

}  // namespace

void GwConfig::validate() const {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("GwConfig: p must be positive");
  if (!(q > 0.0) || !std::isfinite(q)) throw InvalidArgument("GwConfig: q must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("GwConfig: epsilon must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("GwConfig: tol must be positive");
  if (max_outer_iter < 1) throw InvalidArgument("GwConfig: max_outer_iter must be >= 1");
  if (max_sinkhorn_iter < 1) throw InvalidArgument("GwConfig: max_sinkhorn_iter must be >= 1");
  if (polish_iter < 0) throw InvalidArgument("GwConfig: polish_iter must be >= 0");
}

void check_metric_matrix(const Matrix& d, const char* what) {
  if (d.rows() != d.cols() || d.rows() < 1) {
    throw InvalidArgument(std::string(what) + ": metric matrix must be square and non-empty");
  }
  if (!d.allFinite()) throw InvalidArgument(std::string(what) + ": metric matrix has non-finite entries");
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw InvalidArgument(std::string(what) + ": metric matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (d(i, j) < 0.0 || d(j, i) < 0.0) {
        throw InvalidArgument(std::string(what) + ": metric matrix has negative entries");
      }
      if (std::abs(d(i, j) - d(j, i)) > 1e-9 * scale) {
        throw InvalidArgument(std::string(what) + ": metric matrix is not symmetric");
      }
    }
  }
}

Matrix pairwise_distances(const Matrix& x) {
  if (!x.allFinite()) throw InvalidArgument("pairwise_distances: non-finite input");
  const Eigen::Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(j, k);
        s += diff * diff;
      }
      d(i, j) = std::sqrt(s);
      d(j, i) = d(i, j);
    }
  }
  return d;
}

Matrix normalize_by_mean_offdiagonal(const Matrix& d) {
  const Eigen::Index n = d.rows();
  if (n < 2) return d;
  const double mean = (d.sum() - d.trace()) / static_cast<double>(n * (n - 1));
  if (!(mean > 0.0)) return d;
  return d / mean;
}

double gw_objective(const Matrix& dx, const Matrix& dy, const Matrix& plan, double p, double q) {
  if (dx.rows() != dx.cols() || dy.rows() != dy.cols()) throw InvalidArgument("gw_objective: metric matrices must be square");
  if (plan.rows() != dx.rows() || plan.cols() != dy.rows()) {
    throw InvalidArgument("gw_objective: plan is " + std::to_string(plan.rows()) + "x" + std::to_string(plan.cols()) +
                          " but spaces have " + std::to_string(dx.rows()) + " and " + std::to_string(dy.rows()) +
                          " points");
  }
  if (!(p > 0.0) || !(q > 0.0)) throw InvalidArgument("gw_objective: exponents must be positive");
  const Eigen::Index na = dx.rows();
  const Eigen::Index nb = dy.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double pij = plan(i, j);
      if (pij == 0.0) continue;
      for (Eigen::Index k = 0; k < na; ++k) {
        for (Eigen::Index l = 0; l < nb; ++l) {
          const double pkl = plan(k, l);
          if (pkl == 0.0) continue;
          const double diff = std::abs(std::pow(dx(i, k), q) - std::pow(dy(j, l), q));
          sum += std::pow(diff, p) * pij * pkl;
        }
      }
    }
  }
  return std::pow(std::max(0.0, sum), 1.0 / p);
}

GwResult entropic_gw(const Matrix& dx, const Matrix& dy, const Vector& mu, const Vector& nu,
                     const GwConfig& cfg) {
  cfg.validate();
  check_metric_matrix(dx, "entropic_gw (Dx)");
  check_metric_matrix(dy, "entropic_gw (Dy)");
  check_probability(mu, dx.rows(), "mu");
  check_probability(nu, dy.rows(), "nu");

  Matrix a = cfg.normalize_metrics ? normalize_by_mean_offdiagonal(dx) : dx;
  Matrix b = cfg.normalize_metrics ? normalize_by_mean_offdiagonal(dy) : dy;
  if (cfg.q != 1.0) {
    a = a.array().pow(cfg.q).matrix();
    b = b.array().pow(cfg.q).matrix();
  }
  const double scale = std::pow(std::max({1e-300, a.maxCoeff(), b.maxCoeff()}), cfg.p);
  const double negligible = 1e-14 * scale;
  const Contraction contract(std::move(a), std::move(b), cfg.p);

  GwResult result;
  result.plan.row_marginal = mu;
  result.plan.col_marginal = nu;

  Matrix best = mu * nu.transpose();
  Matrix best_grad = contract.apply(best);
  double best_energy = inner(best_grad, best);
  const auto offer = [&](const Matrix& plan, const Matrix& grad, double energy) {
    if (energy < best_energy) {
      best = plan;
      best_grad = grad;
      best_energy = energy;
    }
  };

  // Conditional-gradient descent with exact linear subproblems. The energy is
  // quadratic in the plan, so the line search is closed form.
  const auto polish = [&](Matrix cur, Matrix cur_grad, double energy) {
    for (int it = 1; it <= cfg.polish_iter && energy > negligible; ++it) {
      ++result.polish_iterations;
      const Matrix vertex = emd_exact(cur_grad, mu, nu).plan.coupling;
      const Matrix dir = vertex - cur;
      const double slope = inner(cur_grad, dir);
      if (-slope <= cfg.tol * std::max(energy, negligible)) break;
      const Matrix vertex_grad = contract.apply(vertex);
      const double curvature = inner(vertex_grad - cur_grad, dir);
      double step;
      if (curvature > 0.0) {
        step = std::clamp(-slope / curvature, 0.0, 1.0);
      } else {
        step = 2.0 * slope + curvature < 0.0 ? 1.0 : 0.0;
      }
      if (step <= 0.0) break;
      cur += step * dir;
      cur_grad += step * (vertex_grad - cur_grad);
      const double next = inner(cur_grad, cur);
      offer(cur, cur_grad, next);
      if (energy - next <= cfg.tol * std::max(energy, negligible)) break;
      energy = next;
    }
  };

  {
    const Matrix matched = profile_matching_plan(contract.a(), contract.b(), mu, nu);
    const Matrix matched_grad = contract.apply(matched);
    const double matched_energy = inner(matched_grad, matched);
    offer(matched, matched_grad, matched_energy);
    polish(matched, matched_grad, matched_energy);
  }

  // Epsilon is annealed through the decades above the target, so a run at a
  // smaller decade repeats every stage of a run at a larger one. Each stage
  // continues from the previous stage's entropic plan, starting from the
  // independent coupling, and its result is polished.
  std::vector<double> stages;
  for (double e = 1.0; e > cfg.epsilon * (1.0 + 1e-12); e *= 0.1) stages.push_back(e);
  stages.push_back(cfg.epsilon);

  Matrix plan = mu * nu.transpose();
  Matrix grad = contract.apply(plan);
  double energy = inner(grad, plan);
  Vector f_pot;
  Vector g_pot;
  for (double eps : stages) {
    if (best_energy <= negligible) break;
    double prev = energy;
    for (int it = 1; it <= cfg.max_outer_iter; ++it) {
      ++result.outer_iterations;
      bool ok = true;
      plan = round_to_marginals(sinkhorn(grad, mu, nu, eps, cfg.max_sinkhorn_iter, cfg.tol, ok, f_pot, g_pot), mu, nu);
      if (!ok) result.converged = false;
      grad = contract.apply(plan);
      energy = inner(grad, plan);
      offer(plan, grad, energy);
      const double change = std::abs(energy - prev);
      prev = energy;
      if (change <= cfg.tol * std::max(std::abs(energy), negligible)) break;
    }
    polish(plan, grad, energy);
  }

  // Re-evaluate: the polish phase updates its gradient incrementally.
  best_energy = inner(contract.apply(best), best);
  result.plan.coupling = std::move(best);
  result.value = std::pow(std::max(0.0, best_energy), 1.0 / cfg.p);
  return result;
}

}  // namespace otfs::ot
