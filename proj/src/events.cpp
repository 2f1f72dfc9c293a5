#include "dmsim/events.hpp"

#include <stdexcept>

namespace dmsim {

std::string MemoryEventSink::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

FileEventSink::FileEventSink(const std::string& path)
    : out_(path, std::ios::trunc) {
  if (!out_) {
    throw std::runtime_error("cannot open event log for write: " + path);
  }
}

void FileEventSink::write(nlohmann::json event) {
  out_ << event.dump() << '\n';
  out_.flush();
}

std::vector<nlohmann::json> read_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log: " + path);
  std::vector<nlohmann::json> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error("bad JSON on line " + std::to_string(line_no) +
                               " of " + path);
    }
    events.push_back(std::move(j));
  }
  return events;
}

}  // namespace dmsim
