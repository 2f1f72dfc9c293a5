#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "dmsim/engine.hpp"
#include "dmsim/llm_client.hpp"
#include "dmsim/policies.hpp"

namespace dmsim {

// Prompt builders and reply parsers are free functions so tests can exercise
// them without a live model.

PromptBundle build_goal_prompt(const std::string& field,
                               const std::optional<TrendSummary>& trends,
                               const SimConfig& cfg);
PromptBundle build_metadata_prompt(const std::string& field,
                                   const std::vector<std::string>& existing_names,
                                   const SimConfig& cfg);
PromptBundle build_seller_prompt(const SellerContext& ctx,
                                 const SimConfig& cfg);
PromptBundle build_buyer_prompt(const BuyerContext& ctx, const SimConfig& cfg);

// Parsers throw std::runtime_error on any shape violation; the retry loop in
// complete_structured treats that as a malformed reply and re-asks.
std::string parse_goal_reply(const nlohmann::json& j);
DatasetMetadata parse_metadata_reply(const nlohmann::json& j);
// provide_data parses with empty metadata; the policy fills it in via the
// data generator afterwards.
SellerAction parse_seller_reply(const nlohmann::json& j);
BuyerAction parse_buyer_reply(const nlohmann::json& j);

class LlmGoalGenerator : public GoalGenerator {
 public:
  LlmGoalGenerator(std::shared_ptr<CompletionClient> client, SimConfig cfg,
                   TranscriptWriter* transcript);
  std::string generate(const std::string& field,
                       const std::optional<TrendSummary>& trends,
                       RngStream& rng) override;

 private:
  std::shared_ptr<CompletionClient> client_;
  SimConfig cfg_;
  TranscriptWriter* transcript_;
};

class LlmDataGenerator : public DataGenerator {
 public:
  LlmDataGenerator(std::shared_ptr<CompletionClient> client, SimConfig cfg,
                   TranscriptWriter* transcript);
  // Replies violating the marketplace metadata rules (duplicate name, bad
  // price, ...) consume retries like parse failures do.
  DatasetMetadata generate(const std::string& field,
                           const std::vector<std::string>& existing_names,
                           RngStream& rng) override;

 private:
  std::shared_ptr<CompletionClient> client_;
  SimConfig cfg_;
  TranscriptWriter* transcript_;
};

class LlmSellerPolicy : public SellerPolicy {
 public:
  LlmSellerPolicy(std::shared_ptr<CompletionClient> client,
                  std::shared_ptr<DataGenerator> generator, SimConfig cfg,
                  TranscriptWriter* transcript);
  SellerAction decide(const SellerContext& ctx, RngStream& rng) override;

 private:
  std::shared_ptr<CompletionClient> client_;
  std::shared_ptr<DataGenerator> generator_;
  SimConfig cfg_;
  TranscriptWriter* transcript_;
};

class LlmBuyerPolicy : public BuyerPolicy {
 public:
  LlmBuyerPolicy(std::shared_ptr<CompletionClient> client, SimConfig cfg,
                 TranscriptWriter* transcript);
  BuyerAction decide(const BuyerContext& ctx, RngStream& rng) override;

 private:
  std::shared_ptr<CompletionClient> client_;
  SimConfig cfg_;
  TranscriptWriter* transcript_;
};

// All four roles backed by one completion client; the transcript pointer may
// be null (e.g. replay runs record nothing).
PolicySet make_llm_policies(const SimConfig& cfg,
                            std::shared_ptr<CompletionClient> client,
                            TranscriptWriter* transcript);

}  // namespace dmsim
