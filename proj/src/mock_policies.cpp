#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "dmsim/policies.hpp"

namespace dmsim {

namespace {

// Field names become identifier-shaped in dataset names and column names
// ("social media" -> "social_media").
std::string snake(const std::string& field) {
  std::string out = field;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

constexpr std::array<const char*, 4> kAspects = {"daily", "regional",
                                                 "historical", "streaming"};

constexpr std::array<const char*, 4> kObjectives = {
    "identify seasonal demand patterns", "build a forecasting model",
    "detect anomalies in recent records", "compare segment performance"};

constexpr std::array<UpdateFrequency, 4> kFrequencies = {
    UpdateFrequency::kStatic, UpdateFrequency::kLow, UpdateFrequency::kMedium,
    UpdateFrequency::kHigh};

}  // namespace

MockDataGenerator::MockDataGenerator(std::vector<std::string> fields)
    : fields_(std::move(fields)) {}

DatasetMetadata MockDataGenerator::generate(
    const std::string& field, const std::vector<std::string>& existing_names,
    RngStream& rng) {
  if (std::find(fields_.begin(), fields_.end(), field) == fields_.end()) {
    throw std::invalid_argument("unknown field: " + field);
  }

  DatasetMetadata m;
  const std::string prefix = snake(field) + "_data_";
  // Hash the taken names once; scanning the vector per candidate goes
  // quadratic when thousands of sellers enter in one wave.
  std::unordered_set<std::string_view> taken;
  taken.reserve(existing_names.size());
  for (const std::string& name : existing_names) {
    if (name.rfind(prefix, 0) == 0) taken.insert(name);
  }
  for (std::int64_t n = 1;; ++n) {
    std::string candidate = prefix + std::to_string(n);
    if (!taken.contains(candidate)) {
      m.data_name = std::move(candidate);
      break;
    }
  }
  const char* aspect = kAspects[rng.uniform_index(kAspects.size())];
  m.description =
      "Curated " + field + " records with " + aspect + " coverage";
  m.columns = {"id", "date", snake(field) + "_score"};
  m.tags = {field};
  m.data_price = static_cast<Money>(
      std::llround(rng.log_uniform(static_cast<double>(mock::kPriceMin),
                                   static_cast<double>(mock::kPriceMax))));
  m.data_price = std::clamp<Money>(m.data_price, mock::kPriceMin,
                                   mock::kPriceMax);
  m.update_frequency = kFrequencies[rng.uniform_index(kFrequencies.size())];
  return m;
}

std::string MockGoalGenerator::generate(
    const std::string& field, const std::optional<TrendSummary>& trends,
    RngStream& rng) {
  const char* objective = kObjectives[rng.uniform_index(kObjectives.size())];
  std::string goal = "Analyze " + field + " data to " + objective;
  if (trends.has_value() && !trends->empty()) {
    // The digest arrives sorted; the hottest dataset anchors the goal.
    goal += ", tracking demand around " + trends->front().data_name;
  }
  return goal;
}

MockSellerPolicy::MockSellerPolicy(std::shared_ptr<DataGenerator> generator)
    : generator_(std::move(generator)) {}

SellerAction MockSellerPolicy::decide(const SellerContext& ctx,
                                      RngStream& rng) {
  // Sellers are patient: most turns they just wait for sales.
  if (!rng.bernoulli(mock::kSellerActProbability)) return DoNothing{};
  if (ctx.owned.empty()) return DoNothing{};

  // 1. Refresh the first medium/high-frequency listing that has gone stale.
  for (const DatasetListing& l : ctx.owned) {
    const bool refreshable =
        l.metadata.update_frequency == UpdateFrequency::kMedium ||
        l.metadata.update_frequency == UpdateFrequency::kHigh;
    if (refreshable &&
        ctx.step - l.last_updated_step >= mock::kStaleUpdateSteps) {
      return UpdateData{l.dataset_id};
    }
  }

  // 2. Discount the longest-unsold listing once it has sat long enough.
  const DatasetListing* worst = nullptr;
  for (const DatasetListing& l : ctx.owned) {
    if (l.consecutive_unsold_steps < mock::kRepriceUnsoldSteps) continue;
    if (worst == nullptr ||
        l.consecutive_unsold_steps > worst->consecutive_unsold_steps) {
      worst = &l;
    }
  }
  if (worst != nullptr) {
    const Money cut = static_cast<Money>(std::llround(
        static_cast<double>(worst->metadata.data_price) *
        (1.0 - mock::kPriceCut)));
    return ChangePrice{worst->dataset_id, std::max<Money>(1, cut)};
  }

  // 3. Otherwise grow the catalog inside an already-owned field.
  const std::string& field = ctx.owned.front().metadata.tags.front();
  return ProvideData{generator_->generate(field, ctx.market_dataset_names,
                                          rng)};
}

BuyerAction MockBuyerPolicy::decide(const BuyerContext& ctx, RngStream& rng) {
  if (ctx.plan_text.empty()) {
    return Plan{"Acquire and analyze datasets for: " + ctx.goal};
  }

  const std::string last =
      ctx.action_history.empty() ? "plan" : ctx.action_history.back().action;

  if (last == "search") {
    // Cheapest affordable hit that clears the relevance floor and is not
    // already owned at its current version; re-buys happen only after a
    // seller ships a new version.
    const SearchHit* best = nullptr;
    for (const SearchHit& hit : ctx.last_search_results) {
      if (hit.similarity < mock::kSimilarityFloor) continue;
      if (hit.snapshot.metadata.data_price > ctx.budget) continue;
      const bool owned = std::any_of(
          ctx.purchases.begin(), ctx.purchases.end(),
          [&](const PurchaseRecord& p) {
            return p.dataset_id == hit.dataset_id &&
                   p.version == hit.snapshot.version;
          });
      if (owned) continue;
      if (best == nullptr ||
          hit.snapshot.metadata.data_price < best->snapshot.metadata.data_price ||
          (hit.snapshot.metadata.data_price ==
               best->snapshot.metadata.data_price &&
           hit.dataset_id < best->dataset_id)) {
        best = &hit;
      }
    }
    if (best != nullptr) return Buy{best->dataset_id};
    return DoNothing{};
  }
  if (last == "buy") return Analyze{};
  if (last == "analyze") {
    if (rng.bernoulli(mock::kResumeSearchProbability)) {
      return Search{ctx.goal};
    }
    return Analyze{};
  }
  // After a plan or an idle turn the buyer (re)scans the market.
  return Search{ctx.goal};
}

}  // namespace dmsim
