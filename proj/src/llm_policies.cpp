#include "dmsim/llm_policies.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace dmsim {

namespace {

std::string join(const std::vector<std::string>& items,
                 const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

nlohmann::json trend_digest(const TrendSummary& trends) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TrendEntry& t : trends) {
    arr.push_back({{"data_name", t.data_name},
                   {"field", t.field},
                   {"recent_transactions", t.transactions}});
  }
  return arr;
}

nlohmann::json history_digest(const std::vector<HistoryEntry>& history,
                              std::size_t max_entries) {
  nlohmann::json arr = nlohmann::json::array();
  const std::size_t start =
      history.size() > max_entries ? history.size() - max_entries : 0;
  for (std::size_t i = start; i < history.size(); ++i) {
    arr.push_back({{"step", history[i].step},
                   {"action", history[i].action},
                   {"detail", history[i].detail}});
  }
  return arr;
}

const std::string& require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw std::runtime_error(std::string("reply missing string field '") +
                             key + "'");
  }
  return j.at(key).get_ref<const std::string&>();
}

}  // namespace

// --- prompt builders --------------------------------------------------------

PromptBundle build_goal_prompt(const std::string& field,
                               const std::optional<TrendSummary>& trends,
                               const SimConfig& cfg) {
  PromptBundle b;
  b.schema_id = "goal";
  b.system =
      "You are a buyer joining a data marketplace. Buyers purchase datasets "
      "to carry out an analysis objective. Reply with a single JSON object: "
      "{\"goal\": \"<one concise sentence>\"}.";
  b.user = "Your field of interest is: " + field +
           ".\nThe marketplace covers these fields: " +
           join(cfg.fields, ", ") + ".\n";
  if (trends.has_value()) {
    b.user +=
        "Recently traded datasets, most purchased first:\n" +
        trend_digest(*trends).dump() +
        "\nLet these trends inform what you decide to analyze.\n";
  }
  b.user +=
      "State the analysis goal you will pursue in this marketplace as one "
      "sentence mentioning your field.";
  return b;
}

PromptBundle build_metadata_prompt(
    const std::string& field, const std::vector<std::string>& existing_names,
    const SimConfig& cfg) {
  (void)cfg;
  PromptBundle b;
  b.schema_id = "dataset_metadata";
  b.system =
      "You design dataset listings for a data marketplace. Reply with a "
      "single JSON object with exactly these fields: data_name (short "
      "snake_case identifier, unique in the market), description (one or two "
      "sentences), columns (array of column names), tags (array with exactly "
      "one entry: the dataset's field), data_price (integer, roughly 50 to "
      "5000), update_frequency (one of \"static\", \"low\", \"medium\", "
      "\"high\").";
  b.user = "Create a new dataset listing in the field: " + field +
           ".\nNames already taken (do not reuse): [" +
           join(existing_names, ", ") +
           "]\nMake the description specific enough that a buyer can judge "
           "relevance.";
  return b;
}

PromptBundle build_seller_prompt(const SellerContext& ctx,
                                 const SimConfig& cfg) {
  PromptBundle b;
  b.schema_id = "seller_action";
  b.system =
      "You are a seller in a data marketplace simulation. Each step you pick "
      "exactly one action:\n"
      "- update_data: release a new version of one of your datasets "
      "(args: dataset_id). Buyers can buy an updated dataset again.\n"
      "- change_price: reprice one of your datasets (args: dataset_id, "
      "new_price as a positive integer).\n"
      "- provide_data: list one brand-new dataset in a field you already "
      "sell in (no args; the listing is generated afterwards).\n"
      "- do_nothing: wait and observe the market.\n"
      "- exit_market: leave permanently; your listings are withdrawn.\n"
      "Most steps, doing nothing is the right move; act only with a clear "
      "reason. Honour each dataset's declared update_frequency when deciding "
      "whether to update. Reply with a single JSON object: {\"action\": "
      "\"...\", \"dataset_id\": \"...\", \"new_price\": 0, \"reasoning\": "
      "\"...\"} including only the args your action needs.";
  nlohmann::json owned = nlohmann::json::array();
  for (const DatasetListing& l : ctx.owned) {
    owned.push_back({{"dataset_id", l.dataset_id},
                     {"data_name", l.metadata.data_name},
                     {"field", l.metadata.tags.empty()
                                   ? ""
                                   : l.metadata.tags.front()},
                     {"price", l.metadata.data_price},
                     {"version", l.version},
                     {"update_frequency",
                      to_string(l.metadata.update_frequency)},
                     {"total_sales", l.sales_count},
                     {"steps_since_last_sale", l.consecutive_unsold_steps},
                     {"last_updated_step", l.last_updated_step}});
  }
  b.user = "Step " + std::to_string(ctx.step) + ". You are seller " +
           ctx.seller_id + " with total revenue " +
           std::to_string(ctx.revenue) + ".\nYour listings:\n" + owned.dump() +
           "\nYour recent actions:\n" +
           history_digest(ctx.action_history, 10).dump() +
           "\nUnsold listings are eventually delisted (" +
           std::to_string(cfg.seller_unsold_exit_steps) +
           " consecutive unsold steps across all listings forces you out). "
           "Choose your action.";
  return b;
}

PromptBundle build_buyer_prompt(const BuyerContext& ctx,
                                const SimConfig& cfg) {
  PromptBundle b;
  b.schema_id = "buyer_action";
  b.system =
      "You are a buyer in a data marketplace simulation. Each step you pick "
      "exactly one action:\n"
      "- plan: write or revise your purchasing plan (args: text).\n"
      "- search: query the marketplace for relevant datasets (args: query).\n"
      "- buy: purchase one dataset from your latest search results (args: "
      "dataset_id). The price is deducted from your budget.\n"
      "- analyze: work with the data you own to advance your goal.\n"
      "- do_nothing: wait.\n"
      "- exit_market: leave permanently once your goal is met or unreachable."
      "\nGuidelines: plan before searching; search before buying; buy only "
      "datasets relevant to your goal that you can afford; analyze what you "
      "buy. Datasets are versioned — buying the same dataset again is "
      "worthwhile only after the seller ships a new version. Be active: "
      "progress comes from buying and analyzing, not waiting.";
  if (cfg.subscription_prompt) {
    b.system +=
        " Treat frequently-updated datasets like subscriptions: plan "
        "periodic re-purchases of updated versions that keep serving your "
        "goal.";
  }
  b.system +=
      " Reply with a single JSON object: {\"action\": \"...\", \"text\": "
      "\"...\", \"query\": \"...\", \"dataset_id\": \"...\", \"reasoning\": "
      "\"...\"} including only the args your action needs.";

  nlohmann::json hits = nlohmann::json::array();
  for (const SearchHit& h : ctx.last_search_results) {
    hits.push_back({{"dataset_id", h.dataset_id},
                    {"data_name", h.snapshot.metadata.data_name},
                    {"description", h.snapshot.metadata.description},
                    {"field", h.snapshot.metadata.tags.empty()
                                  ? ""
                                  : h.snapshot.metadata.tags.front()},
                    {"price", h.snapshot.metadata.data_price},
                    {"version", h.snapshot.version},
                    {"similarity", h.similarity}});
  }
  nlohmann::json owned = nlohmann::json::array();
  for (const PurchaseRecord& p : ctx.purchases) {
    owned.push_back({{"dataset_id", p.dataset_id},
                     {"version", p.version},
                     {"bought_at_step", p.step},
                     {"price_paid", p.price}});
  }
  b.user = "Step " + std::to_string(ctx.step) + ". You are buyer " +
           ctx.buyer_id + ".\nGoal: " + ctx.goal +
           "\nRemaining budget: " + std::to_string(ctx.budget) +
           "\nCurrent plan: " +
           (ctx.plan_text.empty() ? "(none yet)" : ctx.plan_text) +
           "\nDatasets you own:\n" + owned.dump() +
           "\nYour latest search results:\n" + hits.dump() +
           "\nYour recent actions:\n" +
           history_digest(ctx.action_history, 10).dump() +
           "\nChoose your action.";
  return b;
}

// --- reply parsers ----------------------------------------------------------

std::string parse_goal_reply(const nlohmann::json& j) {
  const std::string& goal = require_string(j, "goal");
  if (goal.empty()) throw std::runtime_error("goal text is empty");
  return goal;
}

DatasetMetadata parse_metadata_reply(const nlohmann::json& j) {
  DatasetMetadata m;
  m.data_name = require_string(j, "data_name");
  m.description = require_string(j, "description");
  if (!j.contains("columns") || !j.at("columns").is_array()) {
    throw std::runtime_error("reply missing array field 'columns'");
  }
  for (const auto& c : j.at("columns")) {
    if (!c.is_string()) throw std::runtime_error("columns must be strings");
    m.columns.push_back(c.get<std::string>());
  }
  if (!j.contains("tags") || !j.at("tags").is_array()) {
    throw std::runtime_error("reply missing array field 'tags'");
  }
  for (const auto& t : j.at("tags")) {
    if (!t.is_string()) throw std::runtime_error("tags must be strings");
    m.tags.push_back(t.get<std::string>());
  }
  if (!j.contains("data_price") || !j.at("data_price").is_number()) {
    throw std::runtime_error("reply missing numeric field 'data_price'");
  }
  m.data_price =
      static_cast<Money>(std::llround(j.at("data_price").get<double>()));
  const auto freq = parse_update_frequency(require_string(j, "update_frequency"));
  if (!freq.has_value()) {
    throw std::runtime_error("update_frequency must be one of static, low, "
                             "medium, high");
  }
  m.update_frequency = *freq;
  return m;
}

SellerAction parse_seller_reply(const nlohmann::json& j) {
  const std::string& action = require_string(j, "action");
  if (action == "update_data") {
    return UpdateData{require_string(j, "dataset_id")};
  }
  if (action == "change_price") {
    if (!j.contains("new_price") || !j.at("new_price").is_number()) {
      throw std::runtime_error("change_price needs a numeric 'new_price'");
    }
    const Money price =
        static_cast<Money>(std::llround(j.at("new_price").get<double>()));
    if (price <= 0) throw std::runtime_error("new_price must be positive");
    return ChangePrice{require_string(j, "dataset_id"), price};
  }
  if (action == "provide_data") return ProvideData{};
  if (action == "do_nothing") return DoNothing{};
  if (action == "exit_market") return ExitMarket{};
  throw std::runtime_error("unknown seller action '" + action + "'");
}

BuyerAction parse_buyer_reply(const nlohmann::json& j) {
  const std::string& action = require_string(j, "action");
  if (action == "plan") {
    const std::string& text = require_string(j, "text");
    if (text.empty()) throw std::runtime_error("plan text is empty");
    return Plan{text};
  }
  if (action == "search") {
    const std::string& query = require_string(j, "query");
    if (query.empty()) throw std::runtime_error("search query is empty");
    return Search{query};
  }
  if (action == "buy") {
    return Buy{require_string(j, "dataset_id")};
  }
  if (action == "analyze") return Analyze{};
  if (action == "do_nothing") return DoNothing{};
  if (action == "exit_market") return ExitMarket{};
  throw std::runtime_error("unknown buyer action '" + action + "'");
}

// --- policy classes ---------------------------------------------------------

LlmGoalGenerator::LlmGoalGenerator(std::shared_ptr<CompletionClient> client,
                                   SimConfig cfg, TranscriptWriter* transcript)
    : client_(std::move(client)), cfg_(std::move(cfg)),
      transcript_(transcript) {}

std::string LlmGoalGenerator::generate(
    const std::string& field, const std::optional<TrendSummary>& trends,
    RngStream& rng) {
  (void)rng;  // the model supplies the variability
  return complete_structured<std::string>(
      *client_, build_goal_prompt(field, trends, cfg_), cfg_.llm_retry_limit,
      parse_goal_reply, transcript_);
}

LlmDataGenerator::LlmDataGenerator(std::shared_ptr<CompletionClient> client,
                                   SimConfig cfg, TranscriptWriter* transcript)
    : client_(std::move(client)), cfg_(std::move(cfg)),
      transcript_(transcript) {}

DatasetMetadata LlmDataGenerator::generate(
    const std::string& field, const std::vector<std::string>& existing_names,
    RngStream& rng) {
  (void)rng;
  auto parse = [&existing_names](const nlohmann::json& j) {
    DatasetMetadata m = parse_metadata_reply(j);
    const auto violations = validate_metadata(m, existing_names);
    if (!violations.empty()) {
      throw std::runtime_error("metadata rejected: " + join(violations, "; "));
    }
    return m;
  };
  return complete_structured<DatasetMetadata>(
      *client_, build_metadata_prompt(field, existing_names, cfg_),
      cfg_.llm_retry_limit, parse, transcript_);
}

LlmSellerPolicy::LlmSellerPolicy(std::shared_ptr<CompletionClient> client,
                                 std::shared_ptr<DataGenerator> generator,
                                 SimConfig cfg, TranscriptWriter* transcript)
    : client_(std::move(client)), generator_(std::move(generator)),
      cfg_(std::move(cfg)), transcript_(transcript) {}

SellerAction LlmSellerPolicy::decide(const SellerContext& ctx,
                                     RngStream& rng) {
  SellerAction action = complete_structured<SellerAction>(
      *client_, build_seller_prompt(ctx, cfg_), cfg_.llm_retry_limit,
      parse_seller_reply, transcript_);
  if (std::holds_alternative<ProvideData>(action)) {
    // New listings stay inside a field the seller already serves.
    if (ctx.owned.empty() || ctx.owned.front().metadata.tags.empty()) {
      throw GenerationFailed("provide_data without an owned field");
    }
    const std::string& field = ctx.owned.front().metadata.tags.front();
    action = ProvideData{
        generator_->generate(field, ctx.market_dataset_names, rng)};
  }
  return action;
}

LlmBuyerPolicy::LlmBuyerPolicy(std::shared_ptr<CompletionClient> client,
                               SimConfig cfg, TranscriptWriter* transcript)
    : client_(std::move(client)), cfg_(std::move(cfg)),
      transcript_(transcript) {}

BuyerAction LlmBuyerPolicy::decide(const BuyerContext& ctx, RngStream& rng) {
  (void)rng;
  return complete_structured<BuyerAction>(
      *client_, build_buyer_prompt(ctx, cfg_), cfg_.llm_retry_limit,
      parse_buyer_reply, transcript_);
}

PolicySet make_llm_policies(const SimConfig& cfg,
                            std::shared_ptr<CompletionClient> client,
                            TranscriptWriter* transcript) {
  auto generator = std::make_shared<LlmDataGenerator>(client, cfg, transcript);
  return PolicySet{
      generator, std::make_shared<LlmGoalGenerator>(client, cfg, transcript),
      std::make_shared<LlmSellerPolicy>(client, generator, cfg, transcript),
      std::make_shared<LlmBuyerPolicy>(client, cfg, transcript)};
}

}  // namespace dmsim
