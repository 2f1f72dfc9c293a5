#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <deque>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmsim/llm_client.hpp"
#include "dmsim/llm_policies.hpp"
#include "dmsim/policies.hpp"
#include "dmsim/rng.hpp"

using namespace dmsim;
using nlohmann::json;

namespace {

const std::vector<std::string> kFields{
    "cybersecurity", "education", "environmental science", "finance",
    "healthcare",    "manufacturing", "marketing", "social media",
    "sports",        "urban planning"};

// Finds a seed whose stream starts with the wanted bernoulli(p) outcome, so
// rule-table branches can be pinned without faking the RNG.
std::uint64_t seed_where_first_draw(double p, bool want) {
  for (std::uint64_t s = 1; s < 10000; ++s) {
    if (RngStream(s).bernoulli(p) == want) return s;
  }
  REQUIRE(false);
  return 0;
}

DatasetListing listing(const std::string& id, UpdateFrequency freq,
                       Step last_updated, Step unsold, Money price) {
  DatasetListing l;
  l.dataset_id = id;
  l.seller_id = "s-000001";
  l.metadata.data_name = "name_" + id;
  l.metadata.description = "d";
  l.metadata.columns = {"id"};
  l.metadata.tags = {"finance"};
  l.metadata.data_price = price;
  l.metadata.update_frequency = freq;
  l.last_updated_step = last_updated;
  l.consecutive_unsold_steps = unsold;
  return l;
}

SearchHit hit(const std::string& id, double sim, Money price, int version = 1) {
  SearchHit h;
  h.dataset_id = id;
  h.similarity = sim;
  h.snapshot.dataset_id = id;
  h.snapshot.version = version;
  h.snapshot.metadata.data_price = price;
  return h;
}

// Scripted completion client: pops canned replies, optionally throwing to
// simulate transport failures. Counts calls.
struct ScriptedClient : CompletionClient {
  std::deque<std::string> replies;
  std::deque<bool> transport_fail;
  int calls = 0;

  std::string complete(const PromptBundle&) override {
    ++calls;
    if (!transport_fail.empty()) {
      const bool fail = transport_fail.front();
      transport_fail.pop_front();
      if (fail) throw std::runtime_error("connection reset");
    }
    REQUIRE(!replies.empty());
    auto r = replies.front();
    replies.pop_front();
    return r;
  }
};

}  // namespace

TEST_CASE("metadata generator produces valid, unique, deterministic listings") {
  MockDataGenerator gen(kFields);

  SUBCASE("same stream, same bytes") {
    RngStream a(11), b(11);
    const auto m1 = gen.generate("finance", {}, a);
    const auto m2 = gen.generate("finance", {}, b);
    CHECK(m1 == m2);
  }

  SUBCASE("shape and rule compliance") {
    RngStream rng(3);
    const auto m = gen.generate("finance", {"finance_data_1"}, rng);
    CHECK(m.data_name == "finance_data_2");  // skips the taken name
    CHECK(validate_metadata(m, {"finance_data_1"}).empty());
    CHECK(m.tags == std::vector<std::string>{"finance"});
    CHECK(m.columns.size() == 3);
    CHECK(m.description.find("finance") != std::string::npos);
    CHECK(m.data_price >= 50);
    CHECK(m.data_price <= 5000);
  }

  SUBCASE("multi-word fields become identifier-shaped names") {
    RngStream rng(4);
    const auto m = gen.generate("social media", {}, rng);
    CHECK(m.data_name == "social_media_data_1");
    CHECK(m.tags == std::vector<std::string>{"social media"});
  }

  SUBCASE("price stays in band across many draws") {
    RngStream rng(5);
    for (int i = 0; i < 500; ++i) {
      const auto m = gen.generate("sports", {}, rng);
      CHECK(m.data_price >= 50);
      CHECK(m.data_price <= 5000);
    }
  }

  SUBCASE("unknown field is the caller's bug") {
    RngStream rng(6);
    CHECK_THROWS_AS(gen.generate("astrology", {}, rng), std::invalid_argument);
  }
}

TEST_CASE("goal generator writes field goals, with a trend hook when shown one") {
  MockGoalGenerator gen;

  RngStream a(7);
  const auto plain = gen.generate("healthcare", std::nullopt, a);
  CHECK(plain.rfind("Analyze healthcare data to ", 0) == 0);
  CHECK(plain.find("tracking demand") == std::string::npos);

  TrendSummary trends{{"finance_data_3", "finance", 17},
                      {"sports_data_1", "sports", 4}};
  RngStream b(7);
  const auto hooked = gen.generate("healthcare", trends, b);
  // The hottest dataset, not just any, anchors the goal.
  CHECK(hooked.find("tracking demand around finance_data_3") !=
        std::string::npos);

  // An empty digest behaves like no digest.
  RngStream c(7);
  CHECK(gen.generate("healthcare", TrendSummary{}, c) == plain);
}

TEST_CASE("seller rule table") {
  auto gen = std::make_shared<MockDataGenerator>(kFields);
  MockSellerPolicy policy(gen);
  const auto act_seed = seed_where_first_draw(mock::kSellerActProbability, true);
  const auto wait_seed = seed_where_first_draw(mock::kSellerActProbability, false);

  SellerContext ctx;
  ctx.seller_id = "s-000001";
  ctx.step = 10;

  SUBCASE("most turns wait") {
    ctx.owned = {listing("ds-000001", UpdateFrequency::kHigh, 0, 9, 100)};
    RngStream rng(wait_seed);
    CHECK(std::holds_alternative<DoNothing>(policy.decide(ctx, rng)));
  }

  SUBCASE("nothing owned, nothing to do") {
    RngStream rng(act_seed);
    CHECK(std::holds_alternative<DoNothing>(policy.decide(ctx, rng)));
  }

  SUBCASE("stale refreshable listing gets updated first") {
    ctx.owned = {listing("ds-000001", UpdateFrequency::kStatic, 0, 9, 100),
                 listing("ds-000002", UpdateFrequency::kMedium, 8, 9, 100),
                 listing("ds-000003", UpdateFrequency::kHigh, 8, 9, 100)};
    RngStream rng(act_seed);
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<UpdateData>(action));
    // Static listings never refresh; the first refreshable stale one wins.
    CHECK(std::get<UpdateData>(action).dataset_id == "ds-000002");
  }

  SUBCASE("recently updated listings do not refresh") {
    ctx.owned = {listing("ds-000001", UpdateFrequency::kHigh, 9, 2, 100)};
    RngStream rng(act_seed);
    const auto action = policy.decide(ctx, rng);
    CHECK_FALSE(std::holds_alternative<UpdateData>(action));
  }

  SUBCASE("long-unsold listing gets a 20 percent cut") {
    ctx.owned = {listing("ds-000001", UpdateFrequency::kStatic, 10, 5, 1000),
                 listing("ds-000002", UpdateFrequency::kStatic, 10, 7, 999)};
    RngStream rng(act_seed);
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<ChangePrice>(action));
    // The longest-unsold one, at 80 percent of its current price.
    CHECK(std::get<ChangePrice>(action).dataset_id == "ds-000002");
    CHECK(std::get<ChangePrice>(action).new_price == 799);
  }

  SUBCASE("otherwise the catalog grows in an owned field") {
    ctx.owned = {listing("ds-000001", UpdateFrequency::kStatic, 10, 0, 100)};
    ctx.market_dataset_names = {"name_ds-000001", "finance_data_1"};
    RngStream rng(act_seed);
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<ProvideData>(action));
    const auto& m = std::get<ProvideData>(action).metadata;
    CHECK(m.tags == std::vector<std::string>{"finance"});
    CHECK(m.data_name == "finance_data_2");
    CHECK(validate_metadata(m, ctx.market_dataset_names).empty());
  }

  SUBCASE("decisions replay bit-for-bit") {
    ctx.owned = {listing("ds-000001", UpdateFrequency::kMedium, 8, 9, 100)};
    RngStream r1(act_seed), r2(act_seed);
    CHECK(action_name(policy.decide(ctx, r1)) ==
          action_name(policy.decide(ctx, r2)));
  }
}

TEST_CASE("buyer rule table") {
  MockBuyerPolicy policy;
  BuyerContext ctx;
  ctx.buyer_id = "b-000001";
  ctx.field = "finance";
  ctx.goal = "Analyze finance data to build a forecasting model";
  ctx.budget = 1000;
  RngStream rng(1);

  SUBCASE("first move is a plan built from the goal") {
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Plan>(action));
    CHECK(std::get<Plan>(action).text ==
          "Acquire and analyze datasets for: " + ctx.goal);
  }

  ctx.plan_text = "plan";

  SUBCASE("after planning, search the goal") {
    ctx.action_history = {{1, "plan", ""}};
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Search>(action));
    CHECK(std::get<Search>(action).query == ctx.goal);
  }

  SUBCASE("after a search, buy the cheapest relevant affordable hit") {
    ctx.action_history = {{1, "plan", ""}, {2, "search", ""}};
    ctx.last_search_results = {
        hit("ds-000004", 0.9, 700),
        hit("ds-000002", 0.5, 300),
        hit("ds-000003", 0.1, 10),    // below the relevance floor
        hit("ds-000005", 0.5, 2000),  // beyond the budget
    };
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Buy>(action));
    CHECK(std::get<Buy>(action).dataset_id == "ds-000002");
  }

  SUBCASE("price ties break toward the smaller id") {
    ctx.action_history = {{2, "search", ""}};
    ctx.last_search_results = {hit("ds-000009", 0.5, 300),
                               hit("ds-000002", 0.4, 300)};
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Buy>(action));
    CHECK(std::get<Buy>(action).dataset_id == "ds-000002");
  }

  SUBCASE("already-owned versions are skipped, updated versions re-buy") {
    ctx.action_history = {{2, "search", ""}};
    ctx.purchases = {{"ds-000002", 1, 1, 300}};
    ctx.last_search_results = {hit("ds-000002", 0.5, 300, 1),
                               hit("ds-000004", 0.5, 700, 1)};
    auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Buy>(action));
    CHECK(std::get<Buy>(action).dataset_id == "ds-000004");

    // The owned dataset ships version 2: buy it again (and it is cheapest).
    ctx.last_search_results[0] = hit("ds-000002", 0.5, 300, 2);
    action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Buy>(action));
    CHECK(std::get<Buy>(action).dataset_id == "ds-000002");
  }

  SUBCASE("no qualifying hit, no action") {
    ctx.action_history = {{2, "search", ""}};
    ctx.last_search_results = {hit("ds-000003", 0.05, 10)};
    CHECK(std::holds_alternative<DoNothing>(policy.decide(ctx, rng)));
  }

  SUBCASE("a buy is followed by analysis") {
    ctx.action_history = {{3, "buy", "ds-000002"}};
    CHECK(std::holds_alternative<Analyze>(policy.decide(ctx, rng)));
  }

  SUBCASE("after analysis, sometimes back to the market") {
    ctx.action_history = {{4, "analyze", ""}};
    RngStream again(seed_where_first_draw(mock::kResumeSearchProbability, true));
    CHECK(std::holds_alternative<Search>(policy.decide(ctx, again)));
    RngStream keep(seed_where_first_draw(mock::kResumeSearchProbability, false));
    CHECK(std::holds_alternative<Analyze>(policy.decide(ctx, keep)));
  }

  SUBCASE("an idle turn resumes searching") {
    ctx.action_history = {{5, "do_nothing", ""}};
    CHECK(std::holds_alternative<Search>(policy.decide(ctx, rng)));
  }
}

TEST_CASE("structured completion retries malformed replies") {
  const PromptBundle bundle{"sys", "user", "test_schema"};
  const auto parse = std::function<int(const json&)>(
      [](const json& j) { return j.at("value").get<int>(); });

  SUBCASE("recovers within the retry budget") {
    ScriptedClient client;
    client.replies = {"not json at all", R"({"wrong": 1})",
                      R"({"value": 42})"};
    CHECK(complete_structured<int>(client, bundle, 3, parse) == 42);
    CHECK(client.calls == 3);
  }

  SUBCASE("gives up after retry_limit + 1 attempts") {
    ScriptedClient client;
    client.replies = {"a", "b", "c", "d", R"({"value": 5})"};  // 5th never asked
    CHECK_THROWS_AS(complete_structured<int>(client, bundle, 3, parse),
                    GenerationFailed);
    CHECK(client.calls == 4);
  }

  SUBCASE("transport failures consume attempts too") {
    ScriptedClient client;
    client.transport_fail = {true, true, false};
    client.replies = {R"({"value": 9})"};
    CHECK(complete_structured<int>(client, bundle, 3, parse) == 9);
    CHECK(client.calls == 3);

    ScriptedClient dead;
    dead.transport_fail = {true, true, true, true};
    CHECK_THROWS_WITH_AS(complete_structured<int>(dead, bundle, 3, parse),
                         doctest::Contains("transport"), GenerationFailed);
  }

  SUBCASE("zero retries means exactly one attempt") {
    ScriptedClient client;
    client.replies = {"garbage"};
    CHECK_THROWS_AS(complete_structured<int>(client, bundle, 0, parse),
                    GenerationFailed);
    CHECK(client.calls == 1);
  }
}

TEST_CASE("json extraction tolerates model chatter") {
  CHECK(extract_json_object(R"({"a": 1})")["a"] == 1);
  CHECK(extract_json_object("```json\n{\"a\": 2}\n```")["a"] == 2);
  CHECK(extract_json_object("Sure! Here you go: {\"a\": 3} hope that helps")
            ["a"] == 3);
  // Nested braces survive because the outermost span is taken.
  CHECK(extract_json_object(R"(x {"a": {"b": 4}} y)")["a"]["b"] == 4);
  CHECK_THROWS(extract_json_object("no json here"));
  CHECK_THROWS(extract_json_object("{ broken"));
  CHECK_THROWS(extract_json_object("[1, 2, 3]"));  // array, not object
}

TEST_CASE("a recorded transcript replays the same conversation") {
  const char* path = "transcript_roundtrip_test.jsonl";
  {
    TranscriptWriter writer(path);
    writer.record({"s", "u", "goal"}, R"({"goal": "g"})", 0);
    writer.record({"s", "u", "buyer_action"}, "malformed", 0);
    writer.record({"s", "u", "buyer_action"}, R"({"action": "analyze"})", 1);
  }

  ReplayCompletionClient replay(path);
  CHECK(replay.remaining() == 3);
  CHECK(replay.complete({"", "", "goal"}) == R"({"goal": "g"})");
  // The failed attempt is replayed too, reproducing the retry loop.
  CHECK(replay.complete({"", "", "buyer_action"}) == "malformed");
  CHECK(replay.complete({"", "", "buyer_action"}) ==
        R"({"action": "analyze"})");
  CHECK(replay.remaining() == 0);
  CHECK_THROWS_WITH_AS(replay.complete({"", "", "buyer_action"}),
                       doctest::Contains("exhausted"), std::runtime_error);
  std::remove(path);
}

TEST_CASE("replay detects a drifted prompt sequence") {
  const char* path = "transcript_drift_test.jsonl";
  {
    TranscriptWriter writer(path);
    writer.record({"s", "u", "goal"}, R"({"goal": "g"})", 0);
  }
  ReplayCompletionClient replay(path);
  CHECK_THROWS_WITH_AS(replay.complete({"", "", "seller_action"}),
                       doctest::Contains("schema"), std::runtime_error);
  std::remove(path);
}

TEST_CASE("replay rejects unusable transcript files") {
  CHECK_THROWS_AS(ReplayCompletionClient{"missing_transcript.jsonl"},
                  std::runtime_error);
  const char* path = "transcript_bad_test.jsonl";
  {
    std::ofstream out(path);
    out << "{\"schema\": \"goal\"}\n";  // no response field
  }
  CHECK_THROWS_WITH_AS(ReplayCompletionClient{path},
                       doctest::Contains("line 1"), std::runtime_error);
  std::remove(path);
}

TEST_CASE("llm prompts carry the decision-relevant context") {
  SimConfig cfg;

  SUBCASE("seller prompt") {
    SellerContext ctx;
    ctx.seller_id = "s-000007";
    ctx.step = 12;
    ctx.revenue = 450;
    ctx.owned = {listing("ds-000031", UpdateFrequency::kHigh, 9, 3, 777)};
    const auto p = build_seller_prompt(ctx, cfg);
    CHECK(p.schema_id == "seller_action");
    for (const char* needle :
         {"update_data", "change_price", "provide_data", "do_nothing",
          "exit_market"}) {
      CHECK(p.system.find(needle) != std::string::npos);
    }
    CHECK(p.user.find("ds-000031") != std::string::npos);
    CHECK(p.user.find("777") != std::string::npos);
    CHECK(p.user.find("450") != std::string::npos);
  }

  SUBCASE("buyer prompt") {
    BuyerContext ctx;
    ctx.buyer_id = "b-000003";
    ctx.step = 4;
    ctx.field = "finance";
    ctx.goal = "Analyze finance data";
    ctx.budget = 9000;
    ctx.last_search_results = {hit("ds-000002", 0.61, 300)};
    const auto p = build_buyer_prompt(ctx, cfg);
    CHECK(p.schema_id == "buyer_action");
    for (const char* needle :
         {"plan", "search", "buy", "analyze", "do_nothing", "exit_market"}) {
      CHECK(p.system.find(needle) != std::string::npos);
    }
    CHECK(p.user.find("9000") != std::string::npos);
    CHECK(p.user.find("ds-000002") != std::string::npos);
    CHECK(p.user.find("Analyze finance data") != std::string::npos);
  }

  SUBCASE("subscription nudge is config-gated") {
    BuyerContext ctx;
    ctx.goal = "g";
    SimConfig plain;
    plain.subscription_prompt = false;
    SimConfig nudged;
    nudged.subscription_prompt = true;
    const auto p1 = build_buyer_prompt(ctx, plain);
    const auto p2 = build_buyer_prompt(ctx, nudged);
    CHECK(p1.system != p2.system);
  }

  SUBCASE("metadata prompt lists taken names") {
    const auto p = build_metadata_prompt("sports", {"sports_data_1"}, cfg);
    CHECK(p.schema_id == "dataset_metadata");
    CHECK(p.user.find("sports_data_1") != std::string::npos);
  }
}

TEST_CASE("llm reply parsers accept the documented shapes and nothing else") {
  SUBCASE("goal") {
    CHECK(parse_goal_reply(json{{"goal", "Analyze X"}}) == "Analyze X");
    CHECK_THROWS(parse_goal_reply(json{{"goal", ""}}));
    CHECK_THROWS(parse_goal_reply(json{{"aim", "x"}}));
  }

  SUBCASE("metadata") {
    const json good{{"data_name", "n"},
                    {"description", "d"},
                    {"columns", json::array({"a", "b"})},
                    {"tags", json::array({"finance"})},
                    {"data_price", 120},
                    {"update_frequency", "medium"}};
    const auto m = parse_metadata_reply(good);
    CHECK(m.data_name == "n");
    CHECK(m.data_price == 120);
    CHECK(m.update_frequency == UpdateFrequency::kMedium);

    json bad = good;
    bad["update_frequency"] = "hourly";
    CHECK_THROWS(parse_metadata_reply(bad));
    bad = good;
    bad.erase("columns");
    CHECK_THROWS(parse_metadata_reply(bad));
  }

  SUBCASE("seller actions") {
    auto a = parse_seller_reply(json{{"action", "update_data"},
                                     {"dataset_id", "ds-000001"}});
    REQUIRE(std::holds_alternative<UpdateData>(a));
    CHECK(std::get<UpdateData>(a).dataset_id == "ds-000001");

    a = parse_seller_reply(json{{"action", "change_price"},
                                {"dataset_id", "ds-000001"},
                                {"new_price", 80}});
    REQUIRE(std::holds_alternative<ChangePrice>(a));
    CHECK(std::get<ChangePrice>(a).new_price == 80);

    // provide_data returns a placeholder; the generator call happens later.
    a = parse_seller_reply(json{{"action", "provide_data"}});
    CHECK(std::holds_alternative<ProvideData>(a));

    CHECK(std::holds_alternative<DoNothing>(
        parse_seller_reply(json{{"action", "do_nothing"}})));
    CHECK(std::holds_alternative<ExitMarket>(
        parse_seller_reply(json{{"action", "exit_market"}})));

    CHECK_THROWS(parse_seller_reply(json{{"action", "fly"}}));
    CHECK_THROWS(parse_seller_reply(json{{"action", "update_data"}}));
    CHECK_THROWS(parse_seller_reply(
        json{{"action", "change_price"}, {"dataset_id", "x"}}));
  }

  SUBCASE("buyer actions") {
    auto a = parse_buyer_reply(json{{"action", "plan"}, {"text", "t"}});
    REQUIRE(std::holds_alternative<Plan>(a));
    CHECK(std::get<Plan>(a).text == "t");

    a = parse_buyer_reply(json{{"action", "search"}, {"query", "q"}});
    REQUIRE(std::holds_alternative<Search>(a));
    CHECK(std::get<Search>(a).query == "q");

    a = parse_buyer_reply(json{{"action", "buy"}, {"dataset_id", "ds-000004"}});
    REQUIRE(std::holds_alternative<Buy>(a));
    CHECK(std::get<Buy>(a).dataset_id == "ds-000004");

    CHECK(std::holds_alternative<Analyze>(
        parse_buyer_reply(json{{"action", "analyze"}})));
    CHECK(std::holds_alternative<DoNothing>(
        parse_buyer_reply(json{{"action", "do_nothing"}})));
    CHECK(std::holds_alternative<ExitMarket>(
        parse_buyer_reply(json{{"action", "exit_market"}})));

    CHECK_THROWS(parse_buyer_reply(json{{"action", "sell"}}));
    CHECK_THROWS(parse_buyer_reply(json{{"action", "buy"}}));
    CHECK_THROWS(parse_buyer_reply(json{{"action", "search"}, {"query", ""}}));
  }
}

TEST_CASE("llm policies drive decisions through the client") {
  SimConfig cfg;
  auto client = std::make_shared<ScriptedClient>();

  SUBCASE("buyer policy parses the scripted action") {
    client->replies = {R"({"action": "search", "query": "finance data"})"};
    LlmBuyerPolicy policy(client, cfg, nullptr);
    BuyerContext ctx;
    ctx.goal = "g";
    RngStream rng(1);
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<Search>(action));
    CHECK(std::get<Search>(action).query == "finance data");
  }

  SUBCASE("seller provide_data fills metadata via the generator") {
    client->replies = {R"({"action": "provide_data"})"};
    auto gen = std::make_shared<MockDataGenerator>(kFields);
    LlmSellerPolicy policy(client, gen, cfg, nullptr);
    SellerContext ctx;
    ctx.owned = {listing("ds-000001", UpdateFrequency::kStatic, 0, 0, 100)};
    RngStream rng(1);
    const auto action = policy.decide(ctx, rng);
    REQUIRE(std::holds_alternative<ProvideData>(action));
    CHECK_FALSE(std::get<ProvideData>(action).metadata.data_name.empty());
  }

  SUBCASE("metadata generator rejects rule-violating replies, then recovers") {
    // First reply duplicates an existing name, second is clean.
    client->replies = {
        R"({"data_name": "taken", "description": "d", "columns": ["a"],
            "tags": ["finance"], "data_price": 10, "update_frequency": "low"})",
        R"({"data_name": "fresh", "description": "d", "columns": ["a"],
            "tags": ["finance"], "data_price": 10, "update_frequency": "low"})"};
    LlmDataGenerator gen(client, cfg, nullptr);
    RngStream rng(1);
    const auto m = gen.generate("finance", {"taken"}, rng);
    CHECK(m.data_name == "fresh");
    CHECK(client->calls == 2);
  }

  SUBCASE("goal generator surfaces exhaustion as GenerationFailed") {
    client->replies = {"x", "y", "z", "w"};
    LlmGoalGenerator gen(client, cfg, nullptr);
    RngStream rng(1);
    CHECK_THROWS_AS(gen.generate("finance", std::nullopt, rng),
                    GenerationFailed);
  }
}
