#pragma once

// Internal helper: JSON-in/JSON-out POST used by the LLM and embedding
// HTTP clients. Not part of the public headers.

#include <string>

#include <nlohmann/json.hpp>

namespace dmsim::detail {

// POSTs `body` to endpoint+path with a bearer token; returns the parsed
// response body. Throws std::runtime_error on connection failure, non-2xx
// status or a non-JSON response. `endpoint` looks like
// "https://api.openai.com" or "http://localhost:8089".
nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const std::string& api_key,
                         const nlohmann::json& body);

}  // namespace dmsim::detail
