#include "dmsim/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dmsim {

void to_json(nlohmann::json& j, const EntryConfig& c) {
  j = nlohmann::json{{"max_per_step", c.max_per_step},
                     {"growth_rate", c.growth_rate},
                     {"midpoint", c.midpoint},
                     {"window_steps", c.window_steps},
                     {"mode", c.mode}};
}

void from_json(const nlohmann::json& j, EntryConfig& c) {
  c.max_per_step = j.value("max_per_step", c.max_per_step);
  c.growth_rate = j.value("growth_rate", c.growth_rate);
  c.midpoint = j.value("midpoint", c.midpoint);
  c.window_steps = j.value("window_steps", c.window_steps);
  c.mode = j.value("mode", c.mode);
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"initial_buyers", c.initial_buyers},
                     {"initial_sellers", c.initial_sellers},
                     {"budget_levels", c.budget_levels},
                     {"max_steps", c.max_steps},
                     {"entry", c.entry},
                     {"trend_probability", c.trend_probability},
                     {"seller_unsold_exit_steps", c.seller_unsold_exit_steps},
                     {"buyer_ratio_threshold", c.buyer_ratio_threshold},
                     {"plan_streak_threshold", c.plan_streak_threshold},
                     {"top_k_search", c.top_k_search},
                     {"fields", c.fields},
                     {"trend_window_steps", c.trend_window_steps},
                     {"trend_top_n", c.trend_top_n},
                     {"embedding_dim", c.embedding_dim},
                     {"rng_seed", c.rng_seed},
                     {"llm_retry_limit", c.llm_retry_limit},
                     {"embedder", c.embedder},
                     {"parallel_policies", c.parallel_policies},
                     {"shuffle_agent_order", c.shuffle_agent_order},
                     {"subscription_prompt", c.subscription_prompt}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  c.initial_buyers = j.value("initial_buyers", c.initial_buyers);
  c.initial_sellers = j.value("initial_sellers", c.initial_sellers);
  c.budget_levels = j.value("budget_levels", c.budget_levels);
  c.max_steps = j.value("max_steps", c.max_steps);
  if (j.contains("entry")) c.entry = j.at("entry").get<EntryConfig>();
  c.trend_probability = j.value("trend_probability", c.trend_probability);
  c.seller_unsold_exit_steps =
      j.value("seller_unsold_exit_steps", c.seller_unsold_exit_steps);
  c.buyer_ratio_threshold =
      j.value("buyer_ratio_threshold", c.buyer_ratio_threshold);
  c.plan_streak_threshold =
      j.value("plan_streak_threshold", c.plan_streak_threshold);
  c.top_k_search = j.value("top_k_search", c.top_k_search);
  c.fields = j.value("fields", c.fields);
  c.trend_window_steps = j.value("trend_window_steps", c.trend_window_steps);
  c.trend_top_n = j.value("trend_top_n", c.trend_top_n);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.llm_retry_limit = j.value("llm_retry_limit", c.llm_retry_limit);
  c.embedder = j.value("embedder", c.embedder);
  c.parallel_policies = j.value("parallel_policies", c.parallel_policies);
  c.shuffle_agent_order =
      j.value("shuffle_agent_order", c.shuffle_agent_order);
  c.subscription_prompt =
      j.value("subscription_prompt", c.subscription_prompt);
}

std::vector<std::string> SimConfig::validate() const {
  std::vector<std::string> problems;
  if (initial_buyers < 0) problems.push_back("initial_buyers is negative");
  if (initial_sellers < 0) problems.push_back("initial_sellers is negative");
  if (budget_levels.empty()) problems.push_back("budget_levels is empty");
  for (Money b : budget_levels) {
    if (b <= 0) {
      problems.push_back("budget_levels contains a non-positive level");
      break;
    }
  }
  if (max_steps <= 0) problems.push_back("max_steps must be positive");
  if (entry.max_per_step <= 0) {
    problems.push_back("entry.max_per_step must be positive");
  }
  if (entry.growth_rate <= 0) {
    problems.push_back("entry.growth_rate must be positive");
  }
  if (entry.window_steps <= 0) {
    problems.push_back("entry.window_steps must be positive");
  }
  if (entry.mode != "deterministic" && entry.mode != "stochastic") {
    problems.push_back("entry.mode must be 'deterministic' or 'stochastic'");
  }
  if (trend_probability < 0 || trend_probability > 1) {
    problems.push_back("trend_probability must be in [0, 1]");
  }
  if (seller_unsold_exit_steps <= 0) {
    problems.push_back("seller_unsold_exit_steps must be positive");
  }
  if (buyer_ratio_threshold <= 0) {
    problems.push_back("buyer_ratio_threshold must be positive");
  }
  if (plan_streak_threshold <= 0) {
    problems.push_back("plan_streak_threshold must be positive");
  }
  if (top_k_search <= 0) problems.push_back("top_k_search must be positive");
  if (fields.empty()) problems.push_back("fields is empty");
  for (const auto& f : fields) {
    if (f.empty()) {
      problems.push_back("fields contains an empty name");
      break;
    }
  }
  if (trend_window_steps <= 0) {
    problems.push_back("trend_window_steps must be positive");
  }
  if (trend_top_n <= 0) problems.push_back("trend_top_n must be positive");
  if (embedding_dim <= 0) problems.push_back("embedding_dim must be positive");
  if (llm_retry_limit < 0) problems.push_back("llm_retry_limit is negative");
  if (embedder != "mock" && embedder != "http") {
    problems.push_back("embedder must be 'mock' or 'http'");
  }
  return problems;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed config JSON in " + path + ": " +
                             e.what());
  }
  SimConfig cfg;
  try {
    cfg = j.get<SimConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("bad config value in " + path + ": " + e.what());
  }
  auto problems = cfg.validate();
  if (!problems.empty()) {
    std::string msg = "invalid config " + path + ":";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::runtime_error(msg);
  }
  return cfg;
}

double entry_rate(double recent_volume, const EntryConfig& c) {
  return c.max_per_step /
         (1.0 + std::exp(-c.growth_rate * (recent_volume - c.midpoint)));
}

int entrant_count(double rate, const EntryConfig& c, RngStream& rng) {
  if (c.mode == "stochastic") return static_cast<int>(rng.poisson(rate));
  return static_cast<int>(std::floor(rate + 0.5));  // round half up
}

Money draw_budget(RngStream& rng, const std::vector<Money>& levels) {
  if (levels.empty()) throw std::invalid_argument("budget_levels is empty");
  return levels[rng.uniform_index(levels.size())];
}

}  // namespace dmsim
