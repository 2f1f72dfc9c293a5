#include "http_json.hpp"

#include <stdexcept>

#include <httplib.h>

namespace dmsim::detail {

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const std::string& api_key,
                         const nlohmann::json& body) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(120, 0);
  client.set_follow_location(true);

  httplib::Headers headers;
  if (!api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key);
  }
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw std::runtime_error("request to " + endpoint + path +
                             " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw std::runtime_error("HTTP " + std::to_string(res->status) + " from " +
                             endpoint + path + ": " +
                             res->body.substr(0, 500));
  }
  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) {
    throw std::runtime_error("non-JSON response from " + endpoint + path);
  }
  return reply;
}

}  // namespace dmsim::detail
