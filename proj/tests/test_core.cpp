#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "dmsim/config.hpp"
#include "dmsim/rng.hpp"
#include "dmsim/types.hpp"

using namespace dmsim;

TEST_CASE("rng stream is deterministic and well-ranged") {
  RngStream a(123), b(123), c(124);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  // A different seed diverges immediately (mt19937_64 with distinct seeds).
  RngStream a2(123);
  CHECK(a2.next_u64() != c.next_u64());

  RngStream r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform_real();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    CHECK(r.uniform_index(7) < 7);
  }
  CHECK(r.uniform_index(1) == 0);
}

TEST_CASE("derive_stream separates tags and indices") {
  // Same inputs, same stream.
  CHECK(derive_stream(42, "buyer-field", 3).next_u64() ==
        derive_stream(42, "buyer-field", 3).next_u64());
  // Any differing input gives a different stream.
  std::set<std::uint64_t> firsts;
  firsts.insert(derive_stream(42, "buyer-field", 3).next_u64());
  firsts.insert(derive_stream(42, "buyer-field", 4).next_u64());
  firsts.insert(derive_stream(42, "seller-field", 3).next_u64());
  firsts.insert(derive_stream(43, "buyer-field", 3).next_u64());
  firsts.insert(derive_stream(42, "buyer-field", 3, 1).next_u64());
  CHECK(firsts.size() == 5);
}

TEST_CASE("poisson draw has the right mean") {
  RngStream r(99);
  const double mean = 3.7;
  const int n = 20000;
  long long total = 0;
  for (int i = 0; i < n; ++i) total += r.poisson(mean);
  // 4 sigma of the sample mean: sqrt(mean / n).
  const double got = static_cast<double>(total) / n;
  CHECK(std::abs(got - mean) < 4.0 * std::sqrt(mean / n));
}

TEST_CASE("entry rate matches the logistic curve exactly") {
  EntryConfig c;  // L=50, k=0.03, x0=100

  SUBCASE("midpoint gives exactly L/2") {
    CHECK(entry_rate(100.0, c) == 25.0);
  }

  SUBCASE("cold start against a high-precision evaluation") {
    // f(0) = 50 / (1 + e^3), evaluated in extended precision.
    const long double oracle =
        50.0L / (1.0L + std::exp(static_cast<long double>(3.0L)));
    CHECK(std::abs(entry_rate(0.0, c) - static_cast<double>(oracle)) < 1e-9);
    // Frozen value, so a quiet library change cannot drift past the check.
    CHECK(entry_rate(0.0, c) == doctest::Approx(2.371293658878339).epsilon(1e-12));
  }

  SUBCASE("monotone increasing and bounded by L") {
    double prev = -1.0;
    for (double x = 0.0; x <= 400.0; x += 7.0) {
      const double f = entry_rate(x, c);
      CHECK(f > prev);
      CHECK(f < c.max_per_step);
      prev = f;
    }
  }

  SUBCASE("saturates toward L") {
    CHECK(entry_rate(10000.0, c) == doctest::Approx(50.0).epsilon(1e-9));
  }
}

TEST_CASE("deterministic entrant count rounds half up") {
  EntryConfig c;
  c.mode = "deterministic";
  RngStream r(1);
  CHECK(entrant_count(2.5, c, r) == 3);
  CHECK(entrant_count(2.4, c, r) == 2);
  CHECK(entrant_count(2.6, c, r) == 3);
  CHECK(entrant_count(0.49, c, r) == 0);
  CHECK(entrant_count(0.5, c, r) == 1);
  CHECK(entrant_count(0.0, c, r) == 0);
}

TEST_CASE("stochastic entrant count is a poisson draw") {
  EntryConfig c;
  c.mode = "stochastic";
  RngStream r(5);
  const double rate = 2.371293658878339;
  const int n = 20000;
  long long total = 0;
  for (int i = 0; i < n; ++i) {
    const int k = entrant_count(rate, c, r);
    CHECK(k >= 0);
    total += k;
  }
  const double got = static_cast<double>(total) / n;
  CHECK(std::abs(got - rate) < 4.0 * std::sqrt(rate / n));
}

TEST_CASE("budget draw is uniform over the configured levels") {
  const std::vector<Money> levels{1000, 10000, 100000};
  RngStream r(2024);
  const int n = 30000;
  std::map<Money, int> counts;
  for (int i = 0; i < n; ++i) ++counts[draw_budget(r, levels)];
  CHECK(counts.size() == 3);
  // Binomial 3 sigma: sqrt(n * 1/3 * 2/3) ~ 81.6.
  const double expected = n / 3.0;
  const double band = 3.0 * std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
  for (const auto& [level, count] : counts) {
    INFO("level ", level, " count ", count);
    CHECK(std::abs(count - expected) < band);
  }
}

TEST_CASE("metadata validation flags every broken rule") {
  DatasetMetadata good;
  good.data_name = "finance_data_1";
  good.description = "Curated finance records";
  good.columns = {"id", "date", "finance_score"};
  good.tags = {"finance"};
  good.data_price = 500;
  good.update_frequency = UpdateFrequency::kMedium;

  CHECK(validate_metadata(good, {}).empty());
  CHECK(validate_metadata(good, {"other_name"}).empty());

  SUBCASE("duplicate name") {
    const auto v = validate_metadata(good, {"finance_data_1"});
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("duplicates") != std::string::npos);
  }
  SUBCASE("empty name") {
    auto m = good;
    m.data_name.clear();
    CHECK(validate_metadata(m, {}).size() == 1);
  }
  SUBCASE("empty description") {
    auto m = good;
    m.description.clear();
    CHECK(validate_metadata(m, {}).size() == 1);
  }
  SUBCASE("no columns") {
    auto m = good;
    m.columns.clear();
    CHECK(validate_metadata(m, {}).size() == 1);
  }
  SUBCASE("blank column name") {
    auto m = good;
    m.columns.push_back("");
    CHECK(validate_metadata(m, {}).size() == 1);
  }
  SUBCASE("no tags") {
    auto m = good;
    m.tags.clear();
    CHECK(validate_metadata(m, {}).size() == 1);
  }
  SUBCASE("non-positive price") {
    auto m = good;
    m.data_price = 0;
    CHECK(validate_metadata(m, {}).size() == 1);
    m.data_price = -5;
    CHECK(validate_metadata(m, {}).size() == 1);
  }
  SUBCASE("several violations accumulate") {
    DatasetMetadata m;  // everything empty, price 0
    CHECK(validate_metadata(m, {}).size() == 5);
  }
}

TEST_CASE("update frequency names round-trip") {
  for (auto f : {UpdateFrequency::kStatic, UpdateFrequency::kLow,
                 UpdateFrequency::kMedium, UpdateFrequency::kHigh}) {
    const auto parsed = parse_update_frequency(to_string(f));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == f);
  }
  CHECK_FALSE(parse_update_frequency("weekly").has_value());
  CHECK_FALSE(parse_update_frequency("").has_value());
}

TEST_CASE("ids are zero-padded so lexicographic equals creation order") {
  CHECK(make_buyer_id(1) == "b-000001");
  CHECK(make_seller_id(12) == "s-000012");
  CHECK(make_dataset_id(123456) == "ds-123456");
  CHECK(make_buyer_id(9) < make_buyer_id(10));
  CHECK(make_dataset_id(99) < make_dataset_id(100));
}

TEST_CASE("embedding text weights the field tag") {
  DatasetMetadata m;
  m.data_name = "finance_data_1";
  m.description = "Curated records";
  m.tags = {"finance"};
  const std::string text = embedding_text(m);
  // Name + description + the tag three more times.
  std::size_t hits = 0, pos = 0;
  while ((pos = text.find("finance", pos)) != std::string::npos) {
    ++hits;
    pos += 1;
  }
  CHECK(hits == 4);
}

TEST_CASE("config survives a JSON round-trip byte for byte") {
  SimConfig cfg;
  cfg.rng_seed = 777;
  cfg.entry.mode = "stochastic";
  cfg.budget_levels = {5, 50};
  cfg.subscription_prompt = true;

  nlohmann::json j = cfg;
  SimConfig back = j.get<SimConfig>();
  CHECK(back == cfg);
  nlohmann::json j2 = back;
  CHECK(j.dump() == j2.dump());
}

TEST_CASE("partial config files keep defaults for absent keys") {
  const char* path = "partial_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"max_steps": 7, "entry": {"max_per_step": 12.5}})";
  }
  const SimConfig cfg = load_config_file(path);
  CHECK(cfg.max_steps == 7);
  CHECK(cfg.entry.max_per_step == 12.5);
  CHECK(cfg.entry.growth_rate == 0.03);   // untouched default
  CHECK(cfg.initial_buyers == 10);        // untouched default
  CHECK(cfg.fields.size() == 10);
  std::remove(path);
}

TEST_CASE("config loading fails loudly") {
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(load_config_file("no_such_config.json"),
                         doctest::Contains("cannot open"),
                         std::runtime_error);
  }
  SUBCASE("malformed JSON") {
    const char* path = "broken_config_test.json";
    {
      std::ofstream out(path);
      out << "{ not json";
    }
    CHECK_THROWS_AS(load_config_file(path), std::runtime_error);
    std::remove(path);
  }
  SUBCASE("invalid values are rejected with the reason") {
    const char* path = "invalid_config_test.json";
    {
      std::ofstream out(path);
      out << R"({"max_steps": 0})";
    }
    CHECK_THROWS_WITH_AS(load_config_file(path),
                         doctest::Contains("max_steps"), std::runtime_error);
    std::remove(path);
  }
  SUBCASE("unknown entry mode is rejected") {
    const char* path = "badmode_config_test.json";
    {
      std::ofstream out(path);
      out << R"({"entry": {"mode": "sometimes"}})";
    }
    CHECK_THROWS_AS(load_config_file(path), std::runtime_error);
    std::remove(path);
  }
}

TEST_CASE("default config passes its own validation") {
  CHECK(SimConfig{}.validate().empty());
}
