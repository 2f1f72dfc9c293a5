#pragma once

#include <deque>
#include <fstream>
#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "dmsim/policies.hpp"

namespace dmsim {

// One structured request to a language model: system + user message and the
// id of the JSON shape the reply must parse into.
struct PromptBundle {
  std::string system;
  std::string user;
  std::string schema_id;
};

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  // Raw model reply. Throws std::runtime_error on transport failure.
  virtual std::string complete(const PromptBundle& bundle) = 0;
};

// OpenAI-compatible chat-completions transport. Reads DMSIM_LLM_ENDPOINT
// (default https://api.openai.com), DMSIM_LLM_MODEL (default gpt-4o-mini)
// and DMSIM_LLM_API_KEY; construction fails without the key.
class HttpCompletionClient : public CompletionClient {
 public:
  HttpCompletionClient();
  std::string complete(const PromptBundle& bundle) override;

  const std::string& model() const { return model_; }
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
};

// Replays a recorded transcript: complete() returns the recorded responses
// in order and verifies the schema id matches what was recorded, so a
// drifted prompt sequence fails loudly instead of silently desyncing.
class ReplayCompletionClient : public CompletionClient {
 public:
  explicit ReplayCompletionClient(const std::string& transcript_path);
  std::string complete(const PromptBundle& bundle) override;
  std::size_t remaining() const { return records_.size(); }

 private:
  std::deque<nlohmann::json> records_;
};

// Appends one JSONL line per model exchange; a transcript written here can
// seed a ReplayCompletionClient later.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::string& path);
  void record(const PromptBundle& bundle, const std::string& response,
              int attempt);

 private:
  std::ofstream out_;
};

// Models often wrap JSON in markdown fences or prose; pull out the first
// top-level JSON object. Throws nlohmann::json::exception when none parses.
nlohmann::json extract_json_object(const std::string& raw);

// Asks, parses, and re-asks up to `retry_limit` extra times when the reply
// does not parse into the expected shape (`parse` throwing counts as a
// failure, as does a transport error). Every exchange is recorded to the
// transcript when one is given. Exhausted retries raise GenerationFailed.
template <typename T>
T complete_structured(CompletionClient& client, const PromptBundle& bundle,
                      int retry_limit,
                      const std::function<T(const nlohmann::json&)>& parse,
                      TranscriptWriter* transcript = nullptr) {
  std::string last_error = "no attempts made";
  for (int attempt = 0; attempt <= retry_limit; ++attempt) {
    std::string raw;
    try {
      raw = client.complete(bundle);
    } catch (const std::exception& e) {
      last_error = std::string("transport: ") + e.what();
      continue;
    }
    if (transcript != nullptr) transcript->record(bundle, raw, attempt);
    try {
      return parse(extract_json_object(raw));
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw GenerationFailed("no valid " + bundle.schema_id + " reply after " +
                         std::to_string(retry_limit + 1) +
                         " attempts; last error: " + last_error);
}

}  // namespace dmsim
