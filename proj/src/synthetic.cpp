#include "otfs/synthetic.hpp"

#include <cmath>
#include <string>

#include "otfs/error.hpp"
#include "otfs/random.hpp"

namespace otfs {

void PlantedSpec::validate() const {
  if (n_classes < 2) throw InvalidArgument("planted: n_classes must be >= 2");
  if (n_samples < n_classes) throw InvalidArgument("planted: n_samples must be >= n_classes");
  if (n_relevant + n_noise < 1) throw InvalidArgument("planted: need at least one column");
  if (n_duplicates > n_relevant) throw InvalidArgument("planted: n_duplicates must not exceed n_relevant");
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw InvalidArgument("planted: noise_sd must be positive");
  if (!std::isfinite(separation) || separation < 0.0) throw InvalidArgument("planted: separation must be >= 0");
}

PlantedDataset make_planted(const PlantedSpec& spec) {
  spec.validate();
  const std::size_t d = spec.n_relevant + spec.n_noise + spec.n_duplicates;
  PlantedDataset out;
  Dataset& ds = out.data;
  ds.x.resize(static_cast<Eigen::Index>(spec.n_samples), static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < spec.n_classes; ++c) ds.class_names.push_back("c" + std::to_string(c));
  ds.labels.resize(spec.n_samples);
  for (std::size_t r = 0; r < spec.n_samples; ++r) ds.labels[r] = static_cast<int>(r % spec.n_classes);

  Rng rng(spec.seed);
  for (std::size_t k = 0; k < spec.n_relevant + spec.n_noise; ++k) {
    const bool relevant = k < spec.n_relevant;
    const auto col = static_cast<Eigen::Index>(k);
    for (std::size_t r = 0; r < spec.n_samples; ++r) {
      double value = spec.noise_sd * rng.normal();
      if (relevant) {
        const auto shift = static_cast<double>((r % spec.n_classes + k) % spec.n_classes);
        value += spec.separation * spec.noise_sd * shift;
      }
      ds.x(static_cast<Eigen::Index>(r), col) = value;
    }
    if (relevant) {
      ds.feature_names.push_back("rel_" + std::to_string(k));
      out.relevant.push_back(k);
    } else {
      ds.feature_names.push_back("noise_" + std::to_string(k - spec.n_relevant));
      out.noise.push_back(k);
    }
  }
  for (std::size_t k = 0; k < spec.n_duplicates; ++k) {
    const std::size_t col = spec.n_relevant + spec.n_noise + k;
    ds.x.col(static_cast<Eigen::Index>(col)) = ds.x.col(static_cast<Eigen::Index>(k));
    ds.feature_names.push_back(ds.feature_names[k] + "_dup");
    out.duplicates.push_back(col);
  }
  return out;
}

}  // namespace otfs
