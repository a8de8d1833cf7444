#pragma once

#include <span>
#include <vector>

#include "sven/matrix.hpp"

namespace sven {

/// One split of a dataset: row i of `inputs`/`targets` is sample i. `labels`
/// holds integer class labels for classification data and is empty otherwise.
struct Split {
  Matrix inputs;
  Matrix targets;
  std::vector<int> labels;

  std::size_t size() const noexcept { return inputs.rows(); }
};

/// A batch is a list of sample indices into a split.
struct Batch {
  const Split& split;
  std::span<const std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
};

}  // namespace sven
