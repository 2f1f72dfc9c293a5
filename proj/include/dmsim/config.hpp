#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dmsim/rng.hpp"
#include "dmsim/types.hpp"

namespace dmsim {

struct EntryConfig {
  double max_per_step = 50.0;  // L: ceiling on entrants per role per step
  double growth_rate = 0.03;   // k: sigmoid steepness
  double midpoint = 100.0;     // x0: recent volume at which rate is L/2
  Step window_steps = 1;       // how many previous steps count as "recent"
  std::string mode = "deterministic";  // or "stochastic" (Poisson draw)

  bool operator==(const EntryConfig&) const = default;
};

struct SimConfig {
  int initial_buyers = 10;
  int initial_sellers = 5;
  std::vector<Money> budget_levels{1000, 10000, 100000};
  Step max_steps = 40;
  EntryConfig entry;
  double trend_probability = 0.5;  // chance an entrant's goal is trend-aware
  Step seller_unsold_exit_steps = 10;
  double buyer_ratio_threshold = 2.0;      // analyze/buy ratio, strict
  std::int64_t plan_streak_threshold = 7;  // consecutive plans, strict
  int top_k_search = 20;
  std::vector<std::string> fields{
      "cybersecurity", "education", "environmental science", "finance",
      "healthcare",    "manufacturing", "marketing", "social media",
      "sports",        "urban planning"};
  Step trend_window_steps = 5;
  int trend_top_n = 5;
  int embedding_dim = 256;
  std::uint64_t rng_seed = 42;
  int llm_retry_limit = 3;  // re-asks after a malformed reply
  std::string embedder = "mock";  // "mock" | "http"
  bool parallel_policies = false;
  bool shuffle_agent_order = false;  // seeded shuffle of turn order
  bool subscription_prompt = false;  // nudge LLM buyers to plan re-purchases

  bool operator==(const SimConfig&) const = default;

  // Human-readable problems with this config; empty means usable.
  std::vector<std::string> validate() const;
};

void to_json(nlohmann::json& j, const EntryConfig& c);
void from_json(const nlohmann::json& j, EntryConfig& c);
void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

// Loads a config file; keys absent from the file keep their defaults.
// Throws std::runtime_error with a descriptive message on unreadable files,
// malformed JSON or failed validation.
SimConfig load_config_file(const std::string& path);

// Logistic entry rate: L / (1 + exp(-k (x - x0))) for recent volume x.
double entry_rate(double recent_volume, const EntryConfig& c);

// Entrant head-count for one role: round-half-up of the rate in
// deterministic mode, Poisson(rate) draw in stochastic mode.
int entrant_count(double rate, const EntryConfig& c, RngStream& rng);

// Uniform draw over the configured budget levels.
Money draw_budget(RngStream& rng, const std::vector<Money>& levels);

}  // namespace dmsim
