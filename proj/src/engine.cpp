#include "dmsim/engine.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <stdexcept>
#include <utility>

namespace dmsim {

PolicySet make_mock_policies(const SimConfig& cfg) {
  auto generator = std::make_shared<MockDataGenerator>(cfg.fields);
  return PolicySet{generator, std::make_shared<MockGoalGenerator>(),
                   std::make_shared<MockSellerPolicy>(generator),
                   std::make_shared<MockBuyerPolicy>()};
}

int MarketState::active_buyers() const {
  return static_cast<int>(
      std::count_if(buyers.begin(), buyers.end(),
                    [](const BuyerState& b) { return b.active; }));
}

int MarketState::active_sellers() const {
  return static_cast<int>(
      std::count_if(sellers.begin(), sellers.end(),
                    [](const SellerState& s) { return s.active; }));
}

std::vector<std::string> MarketState::all_dataset_names() const {
  std::vector<std::string> names;
  names.reserve(listings.size());
  for (const auto& [id, l] : listings) names.push_back(l.metadata.data_name);
  return names;
}

std::optional<std::string> buyer_forced_exit_reason(const BuyerState& b,
                                                    const SimConfig& cfg) {
  // Ratio rule: strictly more analysis than the threshold allows, and only
  // once something was actually bought. Integer comparison avoids float
  // edge cases when the threshold is a whole number.
  if (b.buy_count >= 1) {
    const double ratio = static_cast<double>(b.analyze_count) /
                         static_cast<double>(b.buy_count);
    if (ratio > cfg.buyer_ratio_threshold) return "forced_analyze_ratio";
  }
  if (b.consecutive_plan_count > cfg.plan_streak_threshold) {
    return "forced_plan_streak";
  }
  return std::nullopt;
}

bool seller_forced_exit(const SellerState& s,
                        const std::map<std::string, DatasetListing>& listings,
                        const SimConfig& cfg) {
  if (s.owned_datasets.empty()) return false;
  for (const auto& id : s.owned_datasets) {
    auto it = listings.find(id);
    if (it == listings.end()) continue;
    if (it->second.consecutive_unsold_steps < cfg.seller_unsold_exit_steps) {
      return false;
    }
  }
  return true;
}

Engine::Engine(SimConfig cfg, PolicySet policies,
               std::unique_ptr<Embedder> embedder, EventSink* sink)
    : cfg_(std::move(cfg)), policies_(std::move(policies)),
      embedder_(std::move(embedder)), sink_(sink) {
  auto problems = cfg_.validate();
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
  if (!policies_.data_generator || !policies_.goal_generator ||
      !policies_.seller_policy || !policies_.buyer_policy) {
    throw std::invalid_argument("policy set is incomplete");
  }
  if (!embedder_) throw std::invalid_argument("missing embedder");
}

void Engine::emit(nlohmann::json event) {
  if (sink_ != nullptr) sink_->write(std::move(event));
}

void Engine::warn(const std::string& message) {
  emit({{"type", "warning"}, {"step", state_.step}, {"message", message}});
}

ListingSnapshot Engine::snapshot_of(const DatasetListing& l) const {
  return ListingSnapshot{l.dataset_id, l.seller_id, l.metadata, l.version};
}

void Engine::index_listing(const DatasetListing& l) {
  store_.upsert(embedder_->embed(embedding_text(l.metadata)), snapshot_of(l));
}

void Engine::initialize() {
  if (initialized_) throw std::logic_error("initialize() ran twice");
  initialized_ = true;
  state_.step = 0;
  state_.step_transactions.assign(1, 0);
  // Sellers first so the opening market already has listings.
  for (int i = 0; i < cfg_.initial_sellers; ++i) spawn_seller();
  // The initial population predates any history, so no trend-aware goals.
  for (int i = 0; i < cfg_.initial_buyers; ++i) spawn_buyer(false);
  emit({{"type", "step_summary"},
        {"step", 0},
        {"transactions", 0},
        {"active_buyers", state_.active_buyers()},
        {"active_sellers", state_.active_sellers()},
        {"listings", store_.size()}});
  if (after_step) after_step(state_);
}

void Engine::spawn_buyer(bool allow_trend_goal) {
  const std::int64_t num = static_cast<std::int64_t>(state_.buyers.size());
  BuyerState b;
  b.num = num;
  b.buyer_id = make_buyer_id(num + 1);
  {
    RngStream rng = derive_stream(cfg_.rng_seed, "buyer-field",
                                  static_cast<std::uint64_t>(num));
    b.field = cfg_.fields[rng.uniform_index(cfg_.fields.size())];
  }
  {
    RngStream rng = derive_stream(cfg_.rng_seed, "buyer-budget",
                                  static_cast<std::uint64_t>(num));
    b.budget = draw_budget(rng, cfg_.budget_levels);
  }
  bool trend_goal = false;
  if (allow_trend_goal) {
    RngStream rng = derive_stream(cfg_.rng_seed, "buyer-trendcoin",
                                  static_cast<std::uint64_t>(num));
    trend_goal = rng.bernoulli(cfg_.trend_probability);
  }
  std::optional<TrendSummary> trends;
  if (trend_goal) trends = current_trends();
  {
    RngStream rng = derive_stream(cfg_.rng_seed, "buyer-goal",
                                  static_cast<std::uint64_t>(num));
    try {
      b.goal = policies_.goal_generator->generate(b.field, trends, rng);
    } catch (const GenerationFailed& e) {
      warn("goal generation failed for " + b.buyer_id + ": " + e.what());
      b.goal = "Analyze " + b.field + " data";
    }
  }
  state_.initial_budgets.push_back(b.budget);
  emit({{"type", "entry"},
        {"step", state_.step},
        {"role", "buyer"},
        {"id", b.buyer_id},
        {"field", b.field},
        {"budget", b.budget},
        {"goal", b.goal},
        {"goal_mode", trend_goal ? "trend" : "plain"}});
  state_.buyers.push_back(std::move(b));
}

void Engine::spawn_seller() {
  const std::int64_t num = static_cast<std::int64_t>(state_.sellers.size());
  SellerState s;
  s.num = num;
  s.seller_id = make_seller_id(num + 1);
  std::string field;
  {
    RngStream rng = derive_stream(cfg_.rng_seed, "seller-field",
                                  static_cast<std::uint64_t>(num));
    field = cfg_.fields[rng.uniform_index(cfg_.fields.size())];
  }
  emit({{"type", "entry"},
        {"step", state_.step},
        {"role", "seller"},
        {"id", s.seller_id}});
  state_.sellers.push_back(std::move(s));
  SellerState& seller = state_.sellers.back();

  // Every entrant gets one opening listing; a generator failure costs only
  // the listing, not the seller.
  RngStream rng = derive_stream(cfg_.rng_seed, "seller-data",
                                static_cast<std::uint64_t>(num));
  try {
    DatasetMetadata metadata = policies_.data_generator->generate(
        field, state_.all_dataset_names(), rng);
    const auto violations =
        validate_metadata(metadata, state_.all_dataset_names());
    if (!violations.empty()) {
      std::string msg = "generated metadata rejected for " + seller.seller_id;
      for (const auto& v : violations) msg += "; " + v;
      warn(msg);
      return;
    }
    create_listing(seller, std::move(metadata));
  } catch (const GenerationFailed& e) {
    warn("data generation failed for " + seller.seller_id + ": " + e.what());
  }
}

std::string Engine::create_listing(SellerState& seller,
                                   DatasetMetadata metadata) {
  const std::int64_t num = static_cast<std::int64_t>(state_.listings.size());
  DatasetListing l;
  l.dataset_id = make_dataset_id(num + 1);
  l.seller_id = seller.seller_id;
  l.metadata = std::move(metadata);
  l.version = 1;
  l.created_step = state_.step;
  l.last_updated_step = state_.step;
  index_listing(l);
  emit({{"type", "listing"},
        {"step", state_.step},
        {"dataset", l.dataset_id},
        {"seller", l.seller_id},
        {"name", l.metadata.data_name},
        {"field", l.metadata.tags.empty() ? "" : l.metadata.tags.front()},
        {"price", l.metadata.data_price},
        {"version", l.version},
        {"update_frequency", to_string(l.metadata.update_frequency)}});
  seller.owned_datasets.push_back(l.dataset_id);
  std::string id = l.dataset_id;
  state_.listings.emplace(id, std::move(l));
  return id;
}

void Engine::deactivate_seller(SellerState& seller,
                               const std::string& reason) {
  seller.active = false;
  for (const auto& id : seller.owned_datasets) {
    auto it = state_.listings.find(id);
    if (it == state_.listings.end()) continue;
    it->second.active = false;
    if (!store_.remove(id)) {
      warn("delisting " + id + " that was not indexed");
    }
  }
  emit({{"type", "exit"},
        {"step", state_.step},
        {"role", "seller"},
        {"id", seller.seller_id},
        {"reason", reason}});
}

TrendSummary Engine::current_trends() const {
  const Step from = state_.step - cfg_.trend_window_steps;
  std::map<std::string, std::int64_t> counts;  // dataset_id -> transactions
  for (const Transaction& t : state_.transactions) {
    if (t.step >= from && t.step < state_.step) ++counts[t.dataset_id];
  }
  TrendSummary all;
  for (const auto& [id, n] : counts) {
    auto it = state_.listings.find(id);
    if (it == state_.listings.end()) continue;
    all.push_back(TrendEntry{
        it->second.metadata.data_name,
        it->second.metadata.tags.empty() ? ""
                                         : it->second.metadata.tags.front(),
        n});
  }
  std::sort(all.begin(), all.end(), [](const TrendEntry& a, const TrendEntry& b) {
    if (a.transactions != b.transactions) return a.transactions > b.transactions;
    return a.data_name < b.data_name;
  });
  if (all.size() > static_cast<std::size_t>(cfg_.trend_top_n)) {
    all.resize(static_cast<std::size_t>(cfg_.trend_top_n));
  }
  return all;
}

void Engine::entry_phase() {
  // Recent volume: bookings over the configured trailing window.
  double volume = 0;
  const Step t = state_.step;
  for (Step s = std::max(0, t - cfg_.entry.window_steps); s < t; ++s) {
    volume += static_cast<double>(state_.step_transactions[s]);
  }
  const double rate = entry_rate(volume, cfg_.entry);
  RngStream buyer_rng = derive_stream(cfg_.rng_seed, "entry-buyers",
                                      static_cast<std::uint64_t>(t));
  RngStream seller_rng = derive_stream(cfg_.rng_seed, "entry-sellers",
                                       static_cast<std::uint64_t>(t));
  const int new_sellers = entrant_count(rate, cfg_.entry, seller_rng);
  const int new_buyers = entrant_count(rate, cfg_.entry, buyer_rng);
  for (int i = 0; i < new_sellers; ++i) spawn_seller();
  for (int i = 0; i < new_buyers; ++i) spawn_buyer(true);
}

SellerContext Engine::make_seller_context(const SellerState& s) const {
  SellerContext ctx;
  ctx.seller_id = s.seller_id;
  ctx.step = state_.step;
  ctx.revenue = s.revenue;
  for (const auto& id : s.owned_datasets) {
    auto it = state_.listings.find(id);
    if (it != state_.listings.end() && it->second.active) {
      ctx.owned.push_back(it->second);
    }
  }
  ctx.market_dataset_names = state_.all_dataset_names();
  ctx.action_history = s.action_history;
  return ctx;
}

BuyerContext Engine::make_buyer_context(const BuyerState& b) const {
  BuyerContext ctx;
  ctx.buyer_id = b.buyer_id;
  ctx.step = state_.step;
  ctx.field = b.field;
  ctx.goal = b.goal;
  ctx.budget = b.budget;
  ctx.plan_text = b.plan_text;
  ctx.purchases = b.purchases;
  ctx.last_search_results = b.last_search_results;
  ctx.buy_count = b.buy_count;
  ctx.analyze_count = b.analyze_count;
  ctx.consecutive_plan_count = b.consecutive_plan_count;
  ctx.action_history = b.action_history;
  return ctx;
}

namespace {

// Outcome of one agent's turn, computed against the phase-start snapshot.
template <typename Action>
struct Turn {
  std::int64_t num = 0;
  bool forced_exit = false;
  std::optional<Action> action;
  std::string failure;  // non-empty when the policy raised GenerationFailed
};

// Seeded Fisher–Yates; used only when shuffle_agent_order is on.
void shuffle_order(std::vector<std::int64_t>& order, RngStream& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
}

}  // namespace

void Engine::seller_phase() {
  std::vector<std::int64_t> order;
  for (const SellerState& s : state_.sellers) {
    if (s.active) order.push_back(s.num);
  }
  if (cfg_.shuffle_agent_order) {
    RngStream rng = derive_stream(cfg_.rng_seed, "shuffle-sellers",
                                  static_cast<std::uint64_t>(state_.step));
    shuffle_order(order, rng);
  }

  // Decide against the phase-start snapshot. Nothing mutates until the
  // apply loop below, so the serial path can build one context at a time —
  // peak memory stays independent of the agent count — while the parallel
  // path prebuilds its snapshots for the fan-out.
  std::vector<Turn<SellerAction>> turns;
  turns.reserve(order.size());
  for (std::int64_t num : order) {
    Turn<SellerAction> turn;
    turn.num = num;
    turn.forced_exit =
        seller_forced_exit(state_.sellers[static_cast<std::size_t>(num)],
                           state_.listings, cfg_);
    turns.push_back(std::move(turn));
  }
  auto decide_one = [&](Turn<SellerAction>& turn, const SellerContext& ctx) {
    RngStream rng = derive_stream(cfg_.rng_seed, "seller-decide",
                                  static_cast<std::uint64_t>(turn.num),
                                  static_cast<std::uint64_t>(state_.step));
    try {
      turn.action = policies_.seller_policy->decide(ctx, rng);
    } catch (const GenerationFailed& e) {
      turn.failure = e.what();
    }
  };
  if (cfg_.parallel_policies) {
    std::vector<SellerContext> contexts(turns.size());
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].forced_exit) continue;
      contexts[i] = make_seller_context(
          state_.sellers[static_cast<std::size_t>(turns[i].num)]);
    }
    std::vector<std::future<void>> futures;
    futures.reserve(turns.size());
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].forced_exit) continue;
      futures.push_back(std::async(
          std::launch::async,
          [&decide_one, &turns, &contexts, i] { decide_one(turns[i], contexts[i]); }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (Turn<SellerAction>& turn : turns) {
      if (turn.forced_exit) continue;
      const SellerContext ctx = make_seller_context(
          state_.sellers[static_cast<std::size_t>(turn.num)]);
      decide_one(turn, ctx);
    }
  }

  // Apply in the same (id-ascending unless shuffled) order.
  for (Turn<SellerAction>& turn : turns) {
    SellerState& s = state_.sellers[static_cast<std::size_t>(turn.num)];
    if (turn.forced_exit) {
      deactivate_seller(s, "forced_unsold");
      continue;
    }
    if (!turn.failure.empty()) {
      warn("seller policy failed for " + s.seller_id + ": " + turn.failure);
      emit({{"type", "action"},
            {"step", state_.step},
            {"role", "seller"},
            {"id", s.seller_id},
            {"action", "do_nothing"},
            {"reason", "generation-failed"}});
      s.action_history.push_back(
          HistoryEntry{state_.step, "do_nothing", "generation-failed"});
      continue;
    }
    apply_seller_action(s, *turn.action);
  }
}

void Engine::apply_seller_action(SellerState& s, const SellerAction& action) {
  const Step step = state_.step;
  auto downgrade = [&](const std::string& from, const std::string& reason) {
    warn("seller " + s.seller_id + " " + from + " rejected: " + reason);
    emit({{"type", "action"},
          {"step", step},
          {"role", "seller"},
          {"id", s.seller_id},
          {"action", "do_nothing"},
          {"downgraded_from", from},
          {"reason", reason}});
    s.action_history.push_back(HistoryEntry{step, "do_nothing", from});
  };
  auto owned_active = [&](const std::string& id) -> DatasetListing* {
    auto it = state_.listings.find(id);
    if (it == state_.listings.end() || !it->second.active) return nullptr;
    if (it->second.seller_id != s.seller_id) return nullptr;
    return &it->second;
  };

  if (const auto* up = std::get_if<UpdateData>(&action)) {
    DatasetListing* l = owned_active(up->dataset_id);
    if (l == nullptr) {
      downgrade("update_data", "unknown or foreign dataset " + up->dataset_id);
      return;
    }
    ++l->version;
    l->last_updated_step = step;
    index_listing(*l);
    emit({{"type", "action"},
          {"step", step},
          {"role", "seller"},
          {"id", s.seller_id},
          {"action", "update_data"},
          {"dataset", l->dataset_id},
          {"version", l->version}});
    s.action_history.push_back(
        HistoryEntry{step, "update_data", l->dataset_id});
    return;
  }
  if (const auto* cp = std::get_if<ChangePrice>(&action)) {
    DatasetListing* l = owned_active(cp->dataset_id);
    if (l == nullptr) {
      downgrade("change_price", "unknown or foreign dataset " + cp->dataset_id);
      return;
    }
    if (cp->new_price <= 0) {
      downgrade("change_price", "non-positive price");
      return;
    }
    l->metadata.data_price = cp->new_price;
    index_listing(*l);
    emit({{"type", "action"},
          {"step", step},
          {"role", "seller"},
          {"id", s.seller_id},
          {"action", "change_price"},
          {"dataset", l->dataset_id},
          {"new_price", cp->new_price}});
    s.action_history.push_back(
        HistoryEntry{step, "change_price", l->dataset_id});
    return;
  }
  if (const auto* pd = std::get_if<ProvideData>(&action)) {
    const auto violations =
        validate_metadata(pd->metadata, state_.all_dataset_names());
    if (!violations.empty()) {
      std::string reason = "metadata invalid";
      for (const auto& v : violations) reason += "; " + v;
      downgrade("provide_data", reason);
      return;
    }
    const std::string id = create_listing(s, pd->metadata);
    emit({{"type", "action"},
          {"step", step},
          {"role", "seller"},
          {"id", s.seller_id},
          {"action", "provide_data"},
          {"dataset", id}});
    s.action_history.push_back(HistoryEntry{step, "provide_data", id});
    return;
  }
  if (std::holds_alternative<DoNothing>(action)) {
    emit({{"type", "action"},
          {"step", step},
          {"role", "seller"},
          {"id", s.seller_id},
          {"action", "do_nothing"}});
    s.action_history.push_back(HistoryEntry{step, "do_nothing", ""});
    return;
  }
  // ExitMarket
  emit({{"type", "action"},
        {"step", step},
        {"role", "seller"},
        {"id", s.seller_id},
        {"action", "exit_market"}});
  s.action_history.push_back(HistoryEntry{step, "exit_market", ""});
  deactivate_seller(s, "voluntary");
}

void Engine::buyer_phase() {
  std::vector<std::int64_t> order;
  for (const BuyerState& b : state_.buyers) {
    if (b.active) order.push_back(b.num);
  }
  if (cfg_.shuffle_agent_order) {
    RngStream rng = derive_stream(cfg_.rng_seed, "shuffle-buyers",
                                  static_cast<std::uint64_t>(state_.step));
    shuffle_order(order, rng);
  }

  // Same snapshot discipline as the seller phase: serial decisions build
  // their context just in time, parallel ones against prebuilt copies.
  std::vector<Turn<BuyerAction>> turns;
  turns.reserve(order.size());
  for (std::int64_t num : order) {
    const BuyerState& b = state_.buyers[static_cast<std::size_t>(num)];
    Turn<BuyerAction> turn;
    turn.num = num;
    // Pre-turn check: a purchase settled last step may already have tripped
    // the ratio rule.
    turn.forced_exit = buyer_forced_exit_reason(b, cfg_).has_value();
    turns.push_back(std::move(turn));
  }
  auto decide_one = [&](Turn<BuyerAction>& turn, const BuyerContext& ctx) {
    RngStream rng = derive_stream(cfg_.rng_seed, "buyer-decide",
                                  static_cast<std::uint64_t>(turn.num),
                                  static_cast<std::uint64_t>(state_.step));
    try {
      turn.action = policies_.buyer_policy->decide(ctx, rng);
    } catch (const GenerationFailed& e) {
      turn.failure = e.what();
    }
  };
  if (cfg_.parallel_policies) {
    std::vector<BuyerContext> contexts(turns.size());
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].forced_exit) continue;
      contexts[i] = make_buyer_context(
          state_.buyers[static_cast<std::size_t>(turns[i].num)]);
    }
    std::vector<std::future<void>> futures;
    futures.reserve(turns.size());
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].forced_exit) continue;
      futures.push_back(std::async(
          std::launch::async,
          [&decide_one, &turns, &contexts, i] { decide_one(turns[i], contexts[i]); }));
    }
    for (auto& f : futures) f.get();
  } else {
    for (Turn<BuyerAction>& turn : turns) {
      if (turn.forced_exit) continue;
      const BuyerContext ctx = make_buyer_context(
          state_.buyers[static_cast<std::size_t>(turn.num)]);
      decide_one(turn, ctx);
    }
  }

  for (Turn<BuyerAction>& turn : turns) {
    BuyerState& b = state_.buyers[static_cast<std::size_t>(turn.num)];
    if (turn.forced_exit) {
      emit({{"type", "exit"},
            {"step", state_.step},
            {"role", "buyer"},
            {"id", b.buyer_id},
            {"reason", *buyer_forced_exit_reason(b, cfg_)}});
      b.active = false;
      continue;
    }
    if (!turn.failure.empty()) {
      warn("buyer policy failed for " + b.buyer_id + ": " + turn.failure);
      emit({{"type", "action"},
            {"step", state_.step},
            {"role", "buyer"},
            {"id", b.buyer_id},
            {"action", "do_nothing"},
            {"reason", "generation-failed"}});
      b.action_history.push_back(
          HistoryEntry{state_.step, "do_nothing", "generation-failed"});
    } else {
      apply_buyer_action(b, *turn.action);
    }
    // Post-turn check: this turn's plan or analyze may have crossed a line.
    if (b.active) {
      if (auto reason = buyer_forced_exit_reason(b, cfg_)) {
        emit({{"type", "exit"},
              {"step", state_.step},
              {"role", "buyer"},
              {"id", b.buyer_id},
              {"reason", *reason}});
        b.active = false;
      }
    }
  }
}

void Engine::apply_buyer_action(BuyerState& b, const BuyerAction& action) {
  const Step step = state_.step;
  auto downgrade = [&](const std::string& from, const std::string& reason) {
    warn("buyer " + b.buyer_id + " " + from + " rejected: " + reason);
    emit({{"type", "action"},
          {"step", step},
          {"role", "buyer"},
          {"id", b.buyer_id},
          {"action", "do_nothing"},
          {"downgraded_from", from},
          {"reason", reason}});
    b.action_history.push_back(HistoryEntry{step, "do_nothing", from});
    b.consecutive_plan_count = 0;
  };

  if (const auto* plan = std::get_if<Plan>(&action)) {
    b.plan_text = plan->text;
    ++b.consecutive_plan_count;
    emit({{"type", "action"},
          {"step", step},
          {"role", "buyer"},
          {"id", b.buyer_id},
          {"action", "plan"},
          {"text", plan->text}});
    b.action_history.push_back(HistoryEntry{step, "plan", plan->text});
    return;
  }
  if (const auto* search = std::get_if<Search>(&action)) {
    Eigen::VectorXd query;
    try {
      query = embedder_->embed(search->query);
    } catch (const std::invalid_argument& e) {
      downgrade("search", e.what());
      return;
    }
    b.last_search_results =
        store_.search(query, static_cast<std::size_t>(cfg_.top_k_search));
    b.consecutive_plan_count = 0;
    nlohmann::json hits = nlohmann::json::array();
    for (const SearchHit& h : b.last_search_results) hits.push_back(h.dataset_id);
    emit({{"type", "action"},
          {"step", step},
          {"role", "buyer"},
          {"id", b.buyer_id},
          {"action", "search"},
          {"query", search->query},
          {"hits", std::move(hits)}});
    b.action_history.push_back(HistoryEntry{step, "search", search->query});
    return;
  }
  if (const auto* buy = std::get_if<Buy>(&action)) {
    auto it = state_.listings.find(buy->dataset_id);
    if (it == state_.listings.end() || !it->second.active) {
      downgrade("buy", "unknown or withdrawn dataset " + buy->dataset_id);
      return;
    }
    b.consecutive_plan_count = 0;
    const Money quoted = it->second.metadata.data_price;
    pending_buys_.push_back(PendingBuy{b.num, buy->dataset_id, quoted});
    emit({{"type", "action"},
          {"step", step},
          {"role", "buyer"},
          {"id", b.buyer_id},
          {"action", "buy"},
          {"dataset", buy->dataset_id},
          {"quoted_price", quoted}});
    b.action_history.push_back(HistoryEntry{step, "buy", buy->dataset_id});
    return;
  }
  if (std::holds_alternative<Analyze>(action)) {
    ++b.analyze_count;
    b.consecutive_plan_count = 0;
    emit({{"type", "action"},
          {"step", step},
          {"role", "buyer"},
          {"id", b.buyer_id},
          {"action", "analyze"}});
    b.action_history.push_back(HistoryEntry{step, "analyze", ""});
    return;
  }
  if (std::holds_alternative<DoNothing>(action)) {
    b.consecutive_plan_count = 0;
    emit({{"type", "action"},
          {"step", step},
          {"role", "buyer"},
          {"id", b.buyer_id},
          {"action", "do_nothing"}});
    b.action_history.push_back(HistoryEntry{step, "do_nothing", ""});
    return;
  }
  // ExitMarket
  b.consecutive_plan_count = 0;
  emit({{"type", "action"},
        {"step", step},
        {"role", "buyer"},
        {"id", b.buyer_id},
        {"action", "exit_market"}});
  b.action_history.push_back(HistoryEntry{step, "exit_market", ""});
  emit({{"type", "exit"},
        {"step", step},
        {"role", "buyer"},
        {"id", b.buyer_id},
        {"reason", "voluntary"}});
  b.active = false;
}

void Engine::transaction_phase() {
  std::set<std::string> sold;
  for (const PendingBuy& pending : pending_buys_) {
    BuyerState& b = state_.buyers[static_cast<std::size_t>(pending.buyer_num)];
    if (!b.active) {
      warn("dropping buy from exited buyer " + b.buyer_id);
      continue;
    }
    auto it = state_.listings.find(pending.dataset_id);
    if (it == state_.listings.end() || !it->second.active) {
      emit({{"type", "reject"},
            {"step", state_.step},
            {"buyer", b.buyer_id},
            {"dataset", pending.dataset_id},
            {"reason", "listing-withdrawn"}});
      continue;
    }
    DatasetListing& l = it->second;
    const Money price = l.metadata.data_price;
    if (b.budget < price) {
      emit({{"type", "reject"},
            {"step", state_.step},
            {"buyer", b.buyer_id},
            {"dataset", l.dataset_id},
            {"reason", "insufficient-budget"},
            {"price", price},
            {"budget", b.budget}});
      continue;
    }
    b.budget -= price;
    SellerState* seller = nullptr;
    for (SellerState& s : state_.sellers) {
      if (s.seller_id == l.seller_id) {
        seller = &s;
        break;
      }
    }
    if (seller != nullptr) seller->revenue += price;
    state_.transactions.push_back(Transaction{state_.step, b.buyer_id,
                                              l.seller_id, l.dataset_id,
                                              l.version,
                                              static_cast<double>(price)});
    state_.step_transactions[static_cast<std::size_t>(state_.step)] += 1;
    b.purchases.push_back(
        PurchaseRecord{l.dataset_id, l.version, state_.step, price});
    ++b.buy_count;
    ++l.sales_count;
    sold.insert(l.dataset_id);
    emit({{"type", "transaction"},
          {"step", state_.step},
          {"buyer", b.buyer_id},
          {"seller", l.seller_id},
          {"dataset", l.dataset_id},
          {"version", l.version},
          {"price", price},
          {"quoted_price", pending.quoted_price}});
  }
  pending_buys_.clear();

  for (auto& [id, l] : state_.listings) {
    if (!l.active) continue;
    if (sold.count(id) > 0) {
      l.consecutive_unsold_steps = 0;
    } else {
      ++l.consecutive_unsold_steps;
    }
  }
}

void Engine::step() {
  if (!initialized_) throw std::logic_error("step() before initialize()");
  ++state_.step;
  state_.step_transactions.push_back(0);
  entry_phase();
  const bool empty =
      state_.active_buyers() == 0 && state_.active_sellers() == 0;
  if (!empty) {
    seller_phase();
    buyer_phase();
    transaction_phase();
  }
  emit({{"type", "step_summary"},
        {"step", state_.step},
        {"transactions",
         state_.step_transactions[static_cast<std::size_t>(state_.step)]},
        {"active_buyers", state_.active_buyers()},
        {"active_sellers", state_.active_sellers()},
        {"listings", store_.size()}});
  if (after_step) after_step(state_);
}

RunStats Engine::run() {
  initialize();
  RunStats stats;
  while (state_.step < cfg_.max_steps) {
    step();
    if (state_.active_buyers() == 0 && state_.active_sellers() == 0) {
      stats.halted_early = state_.step < cfg_.max_steps;
      break;
    }
  }
  stats.last_step = state_.step;
  stats.total_transactions =
      static_cast<std::int64_t>(state_.transactions.size());
  return stats;
}

}  // namespace dmsim
