#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dmsim {

// Whole currency units. Budgets and prices are integers inside the
// simulation, which keeps conservation checks exact; ingested real-world
// logs may carry fractional prices and use double on the metrics side.
using Money = std::int64_t;
using Step = std::int32_t;

enum class UpdateFrequency { kStatic, kLow, kMedium, kHigh };

std::string to_string(UpdateFrequency f);
std::optional<UpdateFrequency> parse_update_frequency(std::string_view s);

struct DatasetMetadata {
  std::string data_name;
  std::string description;
  std::vector<std::string> columns;
  std::vector<std::string> tags;  // exactly one entry: the field tag
  Money data_price = 0;
  UpdateFrequency update_frequency = UpdateFrequency::kStatic;

  bool operator==(const DatasetMetadata&) const = default;
};

// Checks a candidate listing against the marketplace rules. Returns one
// human-readable violation per broken rule; empty means acceptable.
std::vector<std::string> validate_metadata(
    const DatasetMetadata& m, const std::vector<std::string>& existing_names);

// Text handed to the embedder for a listing. The field tag is repeated so
// that field affinity dominates cosine similarity against buyer queries.
std::string embedding_text(const DatasetMetadata& m);

struct DatasetListing {
  std::string dataset_id;
  std::string seller_id;
  DatasetMetadata metadata;  // metadata.data_price is the live price
  int version = 1;
  Step created_step = 0;
  Step last_updated_step = 0;
  std::int64_t sales_count = 0;
  Step consecutive_unsold_steps = 0;
  bool active = true;  // false once the owning seller has left
};

// --- agent actions ---------------------------------------------------------

struct UpdateData {
  std::string dataset_id;
};
struct ChangePrice {
  std::string dataset_id;
  Money new_price = 0;
};
struct ProvideData {
  DatasetMetadata metadata;
};
struct DoNothing {};
struct ExitMarket {};

using SellerAction =
    std::variant<UpdateData, ChangePrice, ProvideData, DoNothing, ExitMarket>;

struct Plan {
  std::string text;
};
struct Search {
  std::string query;
};
struct Buy {
  std::string dataset_id;
};
struct Analyze {};

using BuyerAction =
    std::variant<Plan, Search, Buy, Analyze, DoNothing, ExitMarket>;

// Snake_case name of the action alternative, as logged in event records.
std::string action_name(const SellerAction& a);
std::string action_name(const BuyerAction& a);

// --- market records --------------------------------------------------------

struct Transaction {
  Step step = 0;
  std::string buyer_id;
  std::string seller_id;
  std::string dataset_id;
  int version = 1;
  double price = 0;  // integer-valued for simulated runs

  bool operator==(const Transaction&) const = default;
};

// Read-only copy of a listing as the vector store saw it last.
struct ListingSnapshot {
  std::string dataset_id;
  std::string seller_id;
  DatasetMetadata metadata;
  int version = 1;

  bool operator==(const ListingSnapshot&) const = default;
};

struct SearchHit {
  std::string dataset_id;
  double similarity = 0;
  ListingSnapshot snapshot;
};

struct PurchaseRecord {
  std::string dataset_id;
  int version = 1;
  Step step = 0;
  Money price = 0;
};

struct HistoryEntry {
  Step step = 0;
  std::string action;  // action_name() of what was executed
  std::string detail;  // short free-form argument summary
};

// --- agent state -----------------------------------------------------------

struct SellerState {
  std::string seller_id;
  std::int64_t num = 0;  // creation index; keys RNG streams and turn order
  Money revenue = 0;
  std::vector<std::string> owned_datasets;  // creation order
  std::vector<HistoryEntry> action_history;
  bool active = true;
};

struct BuyerState {
  std::string buyer_id;
  std::int64_t num = 0;
  std::string field;
  std::string goal;
  Money budget = 0;
  std::vector<PurchaseRecord> purchases;
  std::string plan_text;  // empty until the first plan action
  std::vector<SearchHit> last_search_results;
  std::int64_t buy_count = 0;
  std::int64_t analyze_count = 0;
  std::int64_t consecutive_plan_count = 0;
  std::vector<HistoryEntry> action_history;
  bool active = true;
};

// Zero-padded ids keep lexicographic order equal to creation order.
std::string make_buyer_id(std::int64_t num);
std::string make_seller_id(std::int64_t num);
std::string make_dataset_id(std::int64_t num);

}  // namespace dmsim
