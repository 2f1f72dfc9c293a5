#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmsim/config.hpp"
#include "dmsim/rng.hpp"
#include "dmsim/types.hpp"

namespace dmsim {

// Raised when a generator or policy cannot produce a usable result (for the
// LLM-backed versions: malformed output even after the retry budget). The
// engine logs a warning and falls back to doing nothing.
struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One hot dataset in the recent-transaction digest shown to entrants.
struct TrendEntry {
  std::string data_name;
  std::string field;
  std::int64_t transactions = 0;
};
using TrendSummary = std::vector<TrendEntry>;  // sorted, most traded first

// Everything a seller policy may look at. Plain snapshot; policies never
// touch live engine state, which keeps them pure and replayable.
struct SellerContext {
  std::string seller_id;
  Step step = 0;
  Money revenue = 0;
  std::vector<DatasetListing> owned;  // ascending dataset_id
  std::vector<std::string> market_dataset_names;  // for name uniqueness
  std::vector<HistoryEntry> action_history;
};

struct BuyerContext {
  std::string buyer_id;
  Step step = 0;
  std::string field;
  std::string goal;
  Money budget = 0;
  std::string plan_text;
  std::vector<PurchaseRecord> purchases;
  std::vector<SearchHit> last_search_results;
  std::int64_t buy_count = 0;
  std::int64_t analyze_count = 0;
  std::int64_t consecutive_plan_count = 0;
  std::vector<HistoryEntry> action_history;
};

// --- interfaces -------------------------------------------------------------

class DataGenerator {
 public:
  virtual ~DataGenerator() = default;
  // Produces metadata for a new listing in `field`. The result satisfies
  // validate_metadata against `existing_names`. Throws GenerationFailed when
  // it cannot, std::invalid_argument when `field` is not a known field.
  virtual DatasetMetadata generate(const std::string& field,
                                   const std::vector<std::string>& existing_names,
                                   RngStream& rng) = 0;
};

class GoalGenerator {
 public:
  virtual ~GoalGenerator() = default;
  // Analysis goal for a new buyer; `trends` is present only for trend-aware
  // entrants and holds the recent-transaction digest.
  virtual std::string generate(const std::string& field,
                               const std::optional<TrendSummary>& trends,
                               RngStream& rng) = 0;
};

class SellerPolicy {
 public:
  virtual ~SellerPolicy() = default;
  virtual SellerAction decide(const SellerContext& ctx, RngStream& rng) = 0;
};

class BuyerPolicy {
 public:
  virtual ~BuyerPolicy() = default;
  virtual BuyerAction decide(const BuyerContext& ctx, RngStream& rng) = 0;
};

// --- offline (mock) implementations ----------------------------------------

// Fixed rule-table constants for the mock policies.
namespace mock {
inline constexpr double kSellerActProbability = 0.2;
inline constexpr Step kStaleUpdateSteps = 2;
inline constexpr Step kRepriceUnsoldSteps = 5;
inline constexpr double kPriceCut = 0.2;
inline constexpr double kResumeSearchProbability = 0.3;
inline constexpr double kSimilarityFloor = 0.2;
inline constexpr Money kPriceMin = 50;
inline constexpr Money kPriceMax = 5000;
}  // namespace mock

class MockDataGenerator : public DataGenerator {
 public:
  explicit MockDataGenerator(std::vector<std::string> fields);
  DatasetMetadata generate(const std::string& field,
                           const std::vector<std::string>& existing_names,
                           RngStream& rng) override;

 private:
  std::vector<std::string> fields_;
};

class MockGoalGenerator : public GoalGenerator {
 public:
  std::string generate(const std::string& field,
                       const std::optional<TrendSummary>& trends,
                       RngStream& rng) override;
};

// Seller rule table: mostly wait; when acting, refresh a stale medium/high
// frequency listing, else discount a long-unsold one, else list new data in
// an owned field.
class MockSellerPolicy : public SellerPolicy {
 public:
  explicit MockSellerPolicy(std::shared_ptr<DataGenerator> generator);
  SellerAction decide(const SellerContext& ctx, RngStream& rng) override;

 private:
  std::shared_ptr<DataGenerator> generator_;
};

// Buyer rule table: plan once, then cycle search -> buy cheapest relevant
// affordable hit -> analyze, resuming search with a fixed probability.
class MockBuyerPolicy : public BuyerPolicy {
 public:
  BuyerAction decide(const BuyerContext& ctx, RngStream& rng) override;
};

}  // namespace dmsim
