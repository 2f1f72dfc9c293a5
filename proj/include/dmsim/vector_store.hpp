#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dmsim/types.hpp"

namespace dmsim {

// In-memory similarity index over dataset listings. Search is an exhaustive
// linear scan by cosine similarity — exactness and reproducibility matter
// more here than speed, and store sizes stay in the low thousands.
class VectorStore {
 public:
  // Inserts or replaces the entry for snapshot.dataset_id. The vector is
  // normalized on insert; a zero vector is rejected (std::invalid_argument),
  // as is a dimension mismatch with earlier entries.
  void upsert(const Eigen::VectorXd& embedding, const ListingSnapshot& snapshot);

  // Removes an entry; returns false (and changes nothing) if the id is
  // unknown, so callers can log the no-op.
  bool remove(const std::string& dataset_id);

  // Top-k entries by cosine similarity, descending; ties broken by ascending
  // dataset_id. Returns min(k, size()) hits. Throws std::invalid_argument on
  // a zero query vector.
  std::vector<SearchHit> search(const Eigen::VectorXd& query,
                                std::size_t k) const;

  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& dataset_id) const;

 private:
  struct Entry {
    std::string dataset_id;
    Eigen::VectorXd unit;  // normalized embedding
    ListingSnapshot snapshot;
  };
  // Kept sorted by dataset_id; scan order is therefore deterministic.
  std::vector<Entry> entries_;
};

// Dot product accumulated serially in index order. Eigen's vectorized dot()
// may reorder additions per platform; search similarities must be bit-equal
// across machines because they gate purchase decisions.
double serial_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace dmsim
