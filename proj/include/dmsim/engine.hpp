#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmsim/config.hpp"
#include "dmsim/embedding.hpp"
#include "dmsim/events.hpp"
#include "dmsim/policies.hpp"
#include "dmsim/types.hpp"
#include "dmsim/vector_store.hpp"

namespace dmsim {

// The four pluggable roles a run needs.
struct PolicySet {
  std::shared_ptr<DataGenerator> data_generator;
  std::shared_ptr<GoalGenerator> goal_generator;
  std::shared_ptr<SellerPolicy> seller_policy;
  std::shared_ptr<BuyerPolicy> buyer_policy;
};

PolicySet make_mock_policies(const SimConfig& cfg);

struct MarketState {
  Step step = 0;
  std::vector<BuyerState> buyers;    // creation order; index == num
  std::vector<SellerState> sellers;  // creation order; index == num
  // Zero-padded ids make map order equal creation order. Listings are never
  // erased, only deactivated, so history stays queryable.
  std::map<std::string, DatasetListing> listings;
  std::vector<Transaction> transactions;
  std::vector<std::int64_t> step_transactions;  // bookings per step, [0] == 0
  std::vector<Money> initial_budgets;           // per buyer num, entry value

  int active_buyers() const;
  int active_sellers() const;
  std::vector<std::string> all_dataset_names() const;
};

struct RunStats {
  Step last_step = 0;
  std::int64_t total_transactions = 0;
  bool halted_early = false;  // market emptied before max_steps
};

// Forced-exit rules; pure so they can be property-tested directly.
// Returns the exit reason, or nullopt when the buyer may stay.
std::optional<std::string> buyer_forced_exit_reason(const BuyerState& b,
                                                    const SimConfig& cfg);
// A seller is forced out when it owns at least one listing and every one of
// them has gone unsold for the configured stretch.
bool seller_forced_exit(const SellerState& s,
                        const std::map<std::string, DatasetListing>& listings,
                        const SimConfig& cfg);

// Discrete-step market loop: entry, seller turns, buyer turns, transaction
// settlement. Policy decisions are taken against the phase-start snapshot
// and applied in ascending agent order, so an optional parallel fan-out of
// (expensive) policy calls cannot change outcomes.
class Engine {
 public:
  Engine(SimConfig cfg, PolicySet policies, std::unique_ptr<Embedder> embedder,
         EventSink* sink);

  // Step 0: seeds the initial population. Initial buyers are always
  // trend-blind (there is no history yet).
  void initialize();

  // One full step. initialize() must have run.
  void step();

  // initialize() + steps until max_steps or an empty market.
  RunStats run();

  const MarketState& state() const { return state_; }
  const SimConfig& config() const { return cfg_; }
  const VectorStore& store() const { return store_; }

  // Top traded datasets over the recent window, hottest first; what
  // trend-aware entrants get to see.
  TrendSummary current_trends() const;

  // Invoked after every completed step; used by tests to assert per-step
  // invariants like money conservation.
  std::function<void(const MarketState&)> after_step;

 private:
  void entry_phase();
  void seller_phase();
  void buyer_phase();
  void transaction_phase();

  void spawn_buyer(bool allow_trend_goal);
  void spawn_seller();
  // Creates + indexes a listing owned by `seller`; returns its id.
  std::string create_listing(SellerState& seller, DatasetMetadata metadata);
  void deactivate_seller(SellerState& seller, const std::string& reason);

  SellerContext make_seller_context(const SellerState& s) const;
  BuyerContext make_buyer_context(const BuyerState& b) const;

  void apply_seller_action(SellerState& s, const SellerAction& action);
  void apply_buyer_action(BuyerState& b, const BuyerAction& action);

  void emit(nlohmann::json event);
  void warn(const std::string& message);

  ListingSnapshot snapshot_of(const DatasetListing& l) const;
  void index_listing(const DatasetListing& l);

  SimConfig cfg_;
  PolicySet policies_;
  std::unique_ptr<Embedder> embedder_;
  EventSink* sink_;  // may be null
  VectorStore store_;
  MarketState state_;
  bool initialized_ = false;

  struct PendingBuy {
    std::int64_t buyer_num;
    std::string dataset_id;
    Money quoted_price;
  };
  std::vector<PendingBuy> pending_buys_;
};

}  // namespace dmsim
