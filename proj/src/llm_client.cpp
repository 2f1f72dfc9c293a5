#include "dmsim/llm_client.hpp"

#include <cstdlib>
#include <stdexcept>

#include "http_json.hpp"

namespace dmsim {

namespace {

std::string getenv_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

}  // namespace

HttpCompletionClient::HttpCompletionClient() {
  endpoint_ = getenv_or("DMSIM_LLM_ENDPOINT", "https://api.openai.com");
  model_ = getenv_or("DMSIM_LLM_MODEL", "gpt-4o-mini");
  api_key_ = getenv_or("DMSIM_LLM_API_KEY", "");
  if (api_key_.empty()) {
    throw std::runtime_error(
        "llm mode needs DMSIM_LLM_API_KEY set in the environment");
  }
}

std::string HttpCompletionClient::complete(const PromptBundle& bundle) {
  nlohmann::json body{
      {"model", model_},
      {"messages",
       {{{"role", "system"}, {"content", bundle.system}},
        {{"role", "user"}, {"content", bundle.user}}}},
      {"response_format", {{"type", "json_object"}}},
      {"temperature", 1.0}};
  nlohmann::json reply =
      detail::post_json(endpoint_, "/v1/chat/completions", api_key_, body);
  if (!reply.contains("choices") || reply["choices"].empty()) {
    throw std::runtime_error("completion response has no choices");
  }
  const auto& msg = reply["choices"][0]["message"];
  if (!msg.contains("content") || !msg["content"].is_string()) {
    throw std::runtime_error("completion response has no message content");
  }
  return msg["content"].get<std::string>();
}

ReplayCompletionClient::ReplayCompletionClient(
    const std::string& transcript_path) {
  std::ifstream in(transcript_path);
  if (!in) {
    throw std::runtime_error("cannot open transcript: " + transcript_path);
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("schema") || !j.contains("response")) {
      throw std::runtime_error("bad transcript line " +
                               std::to_string(line_no) + " in " +
                               transcript_path);
    }
    records_.push_back(std::move(j));
  }
}

std::string ReplayCompletionClient::complete(const PromptBundle& bundle) {
  if (records_.empty()) {
    throw std::runtime_error("transcript exhausted; prompt sequence drifted");
  }
  nlohmann::json rec = std::move(records_.front());
  records_.pop_front();
  const std::string recorded_schema = rec["schema"].get<std::string>();
  if (recorded_schema != bundle.schema_id) {
    throw std::runtime_error("transcript expects schema '" + recorded_schema +
                             "' but the run asked for '" + bundle.schema_id +
                             "'");
  }
  return rec["response"].get<std::string>();
}

TranscriptWriter::TranscriptWriter(const std::string& path)
    : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open transcript for write: " + path);
}

void TranscriptWriter::record(const PromptBundle& bundle,
                              const std::string& response, int attempt) {
  nlohmann::json j{{"schema", bundle.schema_id},
                   {"system", bundle.system},
                   {"user", bundle.user},
                   {"response", response},
                   {"attempt", attempt}};
  out_ << j.dump() << '\n';
  out_.flush();
}

nlohmann::json extract_json_object(const std::string& raw) {
  // Fast path: the whole reply is JSON.
  {
    nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
    if (!j.is_discarded() && j.is_object()) return j;
  }
  // Otherwise parse the outermost {...} span, which tolerates markdown
  // fences and leading prose.
  const auto first = raw.find('{');
  const auto last = raw.rfind('}');
  if (first == std::string::npos || last == std::string::npos || last < first) {
    throw nlohmann::json::parse_error::create(
        101, 0, "reply contains no JSON object", nullptr);
  }
  return nlohmann::json::parse(raw.substr(first, last - first + 1));
}

}  // namespace dmsim
