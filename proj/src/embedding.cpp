#include "dmsim/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmsim/rng.hpp"
#include "dmsim/vector_store.hpp"
#include "http_json.hpp"

namespace dmsim {

namespace {

// Lowercases and strips each whitespace-separated token to [a-z0-9_];
// punctuation would otherwise make "sports:" and "sports" distinct tokens.
std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || c == '_') {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

std::string getenv_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

}  // namespace

MockEmbedder::MockEmbedder(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim <= 0) throw std::invalid_argument("embedding dim must be positive");
}

Eigen::VectorXd MockEmbedder::embed(std::string_view text) const {
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    throw std::invalid_argument("cannot embed empty text");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  for (const auto& token : tokens) {
    // Per-token stream: same token, same direction, for the whole run.
    RngStream rng = derive_stream(seed_, "mock-embed", fnv1a64(token));
    Eigen::VectorXd v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = rng.uniform_real() * 2.0 - 1.0;
    const double norm = std::sqrt(serial_dot(v, v));
    for (int i = 0; i < dim_; ++i) sum[i] += v[i] / norm;
  }
  const double norm = std::sqrt(serial_dot(sum, sum));
  if (norm == 0.0) throw std::invalid_argument("degenerate embedding");
  for (int i = 0; i < dim_; ++i) sum[i] /= norm;
  return sum;
}

HttpEmbedder::HttpEmbedder(int dim) : dim_(dim) {
  endpoint_ = getenv_or("DMSIM_EMBED_ENDPOINT", "https://api.openai.com");
  model_ = getenv_or("DMSIM_EMBED_MODEL", "text-embedding-3-small");
  api_key_ = getenv_or("DMSIM_EMBED_API_KEY",
                       getenv_or("DMSIM_LLM_API_KEY", ""));
  if (api_key_.empty()) {
    throw std::runtime_error(
        "http embedder needs DMSIM_EMBED_API_KEY (or DMSIM_LLM_API_KEY)");
  }
}

Eigen::VectorXd HttpEmbedder::embed(std::string_view text) const {
  if (tokenize(text).empty()) {
    throw std::invalid_argument("cannot embed empty text");
  }
  nlohmann::json body{{"model", model_},
                      {"input", std::string(text)},
                      {"dimensions", dim_}};
  nlohmann::json reply =
      detail::post_json(endpoint_, "/v1/embeddings", api_key_, body);
  if (!reply.contains("data") || reply["data"].empty() ||
      !reply["data"][0].contains("embedding")) {
    throw std::runtime_error("embedding response missing data[0].embedding");
  }
  const auto& emb = reply["data"][0]["embedding"];
  if (static_cast<int>(emb.size()) != dim_) {
    throw std::runtime_error("embedding dimension mismatch: expected " +
                             std::to_string(dim_) + ", got " +
                             std::to_string(emb.size()));
  }
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = emb[i].get<double>();
  const double norm = std::sqrt(serial_dot(v, v));
  if (norm == 0.0) throw std::runtime_error("embedding service returned zeros");
  for (int i = 0; i < dim_; ++i) v[i] /= norm;
  return v;
}

std::unique_ptr<Embedder> make_embedder(const std::string& kind, int dim,
                                        std::uint64_t seed) {
  if (kind == "mock") return std::make_unique<MockEmbedder>(dim, seed);
  if (kind == "http") return std::make_unique<HttpEmbedder>(dim);
  throw std::invalid_argument("unknown embedder kind: " + kind);
}

}  // namespace dmsim
