#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dmsim {

// Receives the run's event records in order. nlohmann's object keys are
// stored sorted, so dumped lines are byte-stable for equal content.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void write(nlohmann::json event) = 0;
};

// Keeps events in memory; what tests and the analyzer consume.
class MemoryEventSink : public EventSink {
 public:
  void write(nlohmann::json event) override {
    events_.push_back(std::move(event));
  }
  const std::vector<nlohmann::json>& events() const { return events_; }

  // The exact bytes a FileEventSink would have produced.
  std::string to_jsonl() const;

 private:
  std::vector<nlohmann::json> events_;
};

// Appends one JSON line per event as the run progresses.
class FileEventSink : public EventSink {
 public:
  explicit FileEventSink(const std::string& path);
  void write(nlohmann::json event) override;

 private:
  std::ofstream out_;
};

// Fans out to several sinks (e.g. file + memory during a CLI run).
class TeeEventSink : public EventSink {
 public:
  TeeEventSink(EventSink& a, EventSink& b) : a_(a), b_(b) {}
  void write(nlohmann::json event) override {
    a_.write(event);
    b_.write(std::move(event));
  }

 private:
  EventSink& a_;
  EventSink& b_;
};

// Loads an events.jsonl file back into memory. Throws std::runtime_error on
// unreadable files or non-JSON lines.
std::vector<nlohmann::json> read_events_file(const std::string& path);

}  // namespace dmsim
