#include "dmsim/types.hpp"

#include <algorithm>
#include <cstdio>

namespace dmsim {

std::string to_string(UpdateFrequency f) {
  switch (f) {
    case UpdateFrequency::kStatic:
      return "static";
    case UpdateFrequency::kLow:
      return "low";
    case UpdateFrequency::kMedium:
      return "medium";
    case UpdateFrequency::kHigh:
      return "high";
  }
  return "static";
}

std::optional<UpdateFrequency> parse_update_frequency(std::string_view s) {
  if (s == "static") return UpdateFrequency::kStatic;
  if (s == "low") return UpdateFrequency::kLow;
  if (s == "medium") return UpdateFrequency::kMedium;
  if (s == "high") return UpdateFrequency::kHigh;
  return std::nullopt;
}

std::vector<std::string> validate_metadata(
    const DatasetMetadata& m, const std::vector<std::string>& existing_names) {
  std::vector<std::string> violations;
  if (m.data_name.empty()) violations.push_back("data_name is empty");
  if (std::find(existing_names.begin(), existing_names.end(), m.data_name) !=
      existing_names.end()) {
    violations.push_back("data_name '" + m.data_name +
                         "' duplicates an existing listing");
  }
  if (m.description.empty()) violations.push_back("description is empty");
  if (m.columns.empty()) violations.push_back("columns is empty");
  for (const auto& c : m.columns) {
    if (c.empty()) {
      violations.push_back("columns contains an empty name");
      break;
    }
  }
  if (m.tags.empty()) violations.push_back("tags is empty");
  if (m.data_price <= 0) {
    violations.push_back("data_price must be positive, got " +
                         std::to_string(m.data_price));
  }
  return violations;
}

std::string embedding_text(const DatasetMetadata& m) {
  std::string text = m.data_name;
  text += ' ';
  text += m.description;
  // Repeating the tag weights field affinity above incidental word overlap.
  for (const auto& tag : m.tags) {
    for (int i = 0; i < 3; ++i) {
      text += ' ';
      text += tag;
    }
  }
  return text;
}

std::string action_name(const SellerAction& a) {
  struct Visitor {
    std::string operator()(const UpdateData&) const { return "update_data"; }
    std::string operator()(const ChangePrice&) const { return "change_price"; }
    std::string operator()(const ProvideData&) const { return "provide_data"; }
    std::string operator()(const DoNothing&) const { return "do_nothing"; }
    std::string operator()(const ExitMarket&) const { return "exit_market"; }
  };
  return std::visit(Visitor{}, a);
}

std::string action_name(const BuyerAction& a) {
  struct Visitor {
    std::string operator()(const Plan&) const { return "plan"; }
    std::string operator()(const Search&) const { return "search"; }
    std::string operator()(const Buy&) const { return "buy"; }
    std::string operator()(const Analyze&) const { return "analyze"; }
    std::string operator()(const DoNothing&) const { return "do_nothing"; }
    std::string operator()(const ExitMarket&) const { return "exit_market"; }
  };
  return std::visit(Visitor{}, a);
}

namespace {

std::string padded_id(const char* prefix, std::int64_t num) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06lld", prefix,
                static_cast<long long>(num));
  return buf;
}

}  // namespace

std::string make_buyer_id(std::int64_t num) { return padded_id("b", num); }
std::string make_seller_id(std::int64_t num) { return padded_id("s", num); }
std::string make_dataset_id(std::int64_t num) { return padded_id("ds", num); }

}  // namespace dmsim
