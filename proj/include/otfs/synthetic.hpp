#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "otfs/dataset.hpp"

namespace otfs {

/// Planted-relevance generator: Gaussian classes that differ only in the
/// means of the relevant columns.
///
/// Row r belongs to class r mod K. Every column has unit-variance Gaussian
/// noise scaled by `noise_sd`; relevant column k adds
/// separation * noise_sd * ((c + k) mod K) for class c, so each relevant
/// column separates adjacent classes by `separation` standard deviations.
/// Layout: relevant columns, then noise columns, then exact copies of the
/// first `n_duplicates` relevant columns.
struct PlantedSpec {
  std::size_t n_samples = 500;
  std::size_t n_classes = 2;
  double separation = 3.0;
  std::size_t n_relevant = 1;
  std::size_t n_noise = 9;
  std::size_t n_duplicates = 0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlantedDataset {
  Dataset data;
  std::vector<std::size_t> relevant;
  std::vector<std::size_t> noise;
  std::vector<std::size_t> duplicates;  // duplicates[k] copies relevant[k]
};

PlantedDataset make_planted(const PlantedSpec& spec);

}  // namespace otfs
