#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "otfs/error.hpp"
#include "otfs/ot_core.hpp"

namespace otfs::ot {
namespace {

void check_samples(std::span<const double> v, const char* which) {
  if (v.empty()) throw InvalidArgument(std::string("wasserstein1_1d: empty sample ") + which);
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw InvalidArgument(std::string("wasserstein1_1d: non-finite value in sample ") + which);
    }
  }
}

struct WeightedSample {
  double value;
  double weight;
  bool operator<(const WeightedSample& o) const {
    return value < o.value || (value == o.value && weight < o.weight);
  }
  bool operator==(const WeightedSample&) const = default;
};

}  // namespace

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
  check_samples(a, "a");
  check_samples(b, "b");
  std::vector<double> xs(a.begin(), a.end());
  std::vector<double> ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  // Fixed argument order makes the result bit-symmetric.
  if (xs.size() > ys.size() ||
      (xs.size() == ys.size() && std::lexicographical_compare(ys.begin(), ys.end(), xs.begin(), xs.end()))) {
    std::swap(xs, ys);
  }

  // Each x carries ys.size() units of mass, each y carries xs.size().
  const std::uint64_t unit_x = ys.size();
  const std::uint64_t unit_y = xs.size();
  std::uint64_t left_x = unit_x;
  std::uint64_t left_y = unit_y;
  std::size_t i = 0;
  std::size_t j = 0;
  double acc = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const std::uint64_t step = std::min(left_x, left_y);
    acc += static_cast<double>(step) * std::abs(xs[i] - ys[j]);
    left_x -= step;
    left_y -= step;
    if (left_x == 0) {
      ++i;
      left_x = unit_x;
    }
    if (left_y == 0) {
      ++j;
      left_y = unit_y;
    }
  }
  return acc / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

double wasserstein1_1d_weighted(std::span<const double> a, std::span<const double> wa,
                                std::span<const double> b, std::span<const double> wb) {
  check_samples(a, "a");
  check_samples(b, "b");
  if (a.size() != wa.size() || b.size() != wb.size()) {
    throw InvalidArgument("wasserstein1_1d_weighted: weight count does not match sample count");
  }
  auto gather = [](std::span<const double> v, std::span<const double> w) {
    std::vector<WeightedSample> out(v.size());
    double total = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!(w[k] >= 0.0) || !std::isfinite(w[k])) {
        throw InvalidArgument("wasserstein1_1d_weighted: weights must be finite and nonnegative");
      }
      out[k] = {v[k], w[k]};
      total += w[k];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidArgument("wasserstein1_1d_weighted: weights must sum to 1");
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<WeightedSample> xs = gather(a, wa);
  std::vector<WeightedSample> ys = gather(b, wb);
  if (xs.size() > ys.size() ||
      (xs.size() == ys.size() && std::lexicographical_compare(ys.begin(), ys.end(), xs.begin(), xs.end()))) {
    std::swap(xs, ys);
  }

  std::size_t i = 0;
  std::size_t j = 0;
  double left_x = xs[0].weight;
  double left_y = ys[0].weight;
  double acc = 0.0;
  while (i < xs.size() && j < ys.size()) {
    if (left_x <= left_y) {
      acc += left_x * std::abs(xs[i].value - ys[j].value);
      left_y -= left_x;
      if (++i < xs.size()) left_x = xs[i].weight;
    } else {
      acc += left_y * std::abs(xs[i].value - ys[j].value);
      left_x -= left_y;
      if (++j < ys.size()) left_y = ys[j].weight;
    }
  }
  return acc;
}

}  // namespace otfs::ot
