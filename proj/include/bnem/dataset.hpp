#ifndef BNEM_DATASET_HPP
#define BNEM_DATASET_HPP

#include <vector>

#include "bnem/model.hpp"

namespace bnem {

/// Ordered records over the nodes of one NetworkStructure; column c of a
/// record holds the observed state index of node c, or kMissing. Rows are
/// rectangular: one cell per node.
struct Dataset {
  std::vector<std::vector<int>> records;

  int record_count() const { return static_cast<int>(records.size()); }

  bool record_complete(int l) const {
    for (int cell : records[l])
      if (cell == kMissing) return false;
    return true;
  }
};

}  // namespace bnem

#endif  // BNEM_DATASET_HPP
