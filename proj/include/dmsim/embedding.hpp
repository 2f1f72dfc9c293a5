#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace dmsim {

// Maps text to a fixed-dimension unit vector. Implementations must be
// deterministic for a fixed configuration: the engine's reproducibility
// guarantees rest on equal text giving bit-equal vectors.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  // Throws std::invalid_argument on empty/whitespace-only text.
  virtual Eigen::VectorXd embed(std::string_view text) const = 0;
};

// Offline embedder: the text is lowercased, split on whitespace, and each
// token (stripped to [a-z0-9_]) is hashed to a seeded pseudo-random unit
// vector; token vectors are summed and the sum L2-normalized. Shared tokens
// between two texts raise their cosine similarity, which is all the mock
// policies need.
class MockEmbedder : public Embedder {
 public:
  MockEmbedder(int dim, std::uint64_t seed);
  int dim() const override { return dim_; }
  Eigen::VectorXd embed(std::string_view text) const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Remote embedder speaking the common POST /v1/embeddings JSON shape.
// Reads DMSIM_EMBED_ENDPOINT / DMSIM_EMBED_MODEL / DMSIM_EMBED_API_KEY
// (key falls back to DMSIM_LLM_API_KEY). Construction fails without a key.
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(int dim);
  int dim() const override { return dim_; }
  Eigen::VectorXd embed(std::string_view text) const override;

 private:
  int dim_;
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
};

std::unique_ptr<Embedder> make_embedder(const std::string& kind, int dim,
                                        std::uint64_t seed);

}  // namespace dmsim
