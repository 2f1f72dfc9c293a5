#include "dmsim/vector_store.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmsim {

double serial_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double acc = 0.0;
  const Eigen::Index n = a.size();
  for (Eigen::Index i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void VectorStore::upsert(const Eigen::VectorXd& embedding,
                         const ListingSnapshot& snapshot) {
  if (!entries_.empty() && embedding.size() != entries_.front().unit.size()) {
    throw std::invalid_argument(
        "embedding dimension mismatch: store holds " +
        std::to_string(entries_.front().unit.size()) + "-d vectors, got " +
        std::to_string(embedding.size()));
  }
  const double norm = std::sqrt(serial_dot(embedding, embedding));
  if (norm == 0.0) {
    throw std::invalid_argument("cannot index a zero embedding for " +
                                snapshot.dataset_id);
  }
  Eigen::VectorXd unit(embedding.size());
  for (Eigen::Index i = 0; i < embedding.size(); ++i) {
    unit[i] = embedding[i] / norm;
  }

  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), snapshot.dataset_id,
      [](const Entry& e, const std::string& id) { return e.dataset_id < id; });
  if (it != entries_.end() && it->dataset_id == snapshot.dataset_id) {
    it->unit = std::move(unit);
    it->snapshot = snapshot;
  } else {
    entries_.insert(it, Entry{snapshot.dataset_id, std::move(unit), snapshot});
  }
}

bool VectorStore::remove(const std::string& dataset_id) {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), dataset_id,
      [](const Entry& e, const std::string& id) { return e.dataset_id < id; });
  if (it == entries_.end() || it->dataset_id != dataset_id) return false;
  entries_.erase(it);
  return true;
}

bool VectorStore::contains(const std::string& dataset_id) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), dataset_id,
      [](const Entry& e, const std::string& id) { return e.dataset_id < id; });
  return it != entries_.end() && it->dataset_id == dataset_id;
}

std::vector<SearchHit> VectorStore::search(const Eigen::VectorXd& query,
                                           std::size_t k) const {
  const double qnorm = std::sqrt(serial_dot(query, query));
  if (qnorm == 0.0) throw std::invalid_argument("zero query vector");
  if (!entries_.empty() && query.size() != entries_.front().unit.size()) {
    throw std::invalid_argument("query dimension mismatch");
  }

  std::vector<SearchHit> hits;
  hits.reserve(entries_.size());
  for (const Entry& e : entries_) {
    // Entries are unit vectors, so cosine = dot(q, e) / |q|.
    hits.push_back(
        SearchHit{e.dataset_id, serial_dot(query, e.unit) / qnorm, e.snapshot});
  }
  // Descending similarity; equal similarities resolve by ascending id.
  // entries_ is id-sorted and stable_sort keeps that order on ties.
  std::stable_sort(hits.begin(), hits.end(),
                   [](const SearchHit& a, const SearchHit& b) {
                     return a.similarity > b.similarity;
                   });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace dmsim
