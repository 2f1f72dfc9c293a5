#include "dmsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace dmsim {

std::map<std::string, std::int64_t> purchases_per_dataset(
    const std::vector<Transaction>& txs) {
  std::map<std::string, std::int64_t> counts;
  for (const Transaction& t : txs) ++counts[t.dataset_id];
  return counts;
}

std::map<std::string, std::int64_t> purchases_per_buyer(
    const std::vector<Transaction>& txs) {
  std::map<std::string, std::int64_t> counts;
  for (const Transaction& t : txs) ++counts[t.buyer_id];
  return counts;
}

std::map<std::int64_t, std::int64_t> repeat_purchase_multiplicities(
    const std::vector<Transaction>& txs) {
  std::map<std::pair<std::string, std::string>, std::int64_t> pair_counts;
  for (const Transaction& t : txs) ++pair_counts[{t.buyer_id, t.dataset_id}];
  std::map<std::int64_t, std::int64_t> multiplicities;
  for (const auto& [pair, n] : pair_counts) ++multiplicities[n];
  return multiplicities;
}

namespace {

bool all_integers(const std::vector<double>& v) {
  for (double x : v) {
    if (std::floor(x) != x) return false;
  }
  return true;
}

// alpha and KS for the tail starting at sorted index `i` with threshold
// sorted[i]; `suffix_ln` holds sums of ln over suffixes.
struct TailFit {
  double alpha;
  double ks;
};

TailFit fit_tail(const std::vector<double>& sorted,
                 const std::vector<double>& suffix_ln, std::size_t i,
                 bool integer_data) {
  const std::size_t n = sorted.size() - i;
  const double x_min = sorted[i];
  const double lb = integer_data ? x_min - 0.5 : x_min;
  const double alpha =
      1.0 + static_cast<double>(n) /
                (suffix_ln[i] - static_cast<double>(n) * std::log(lb));

  // ecdf vs model CDF at each distinct tail value.
  double ks = 0.0;
  std::size_t j = i;
  while (j < sorted.size()) {
    std::size_t k = j;
    while (k + 1 < sorted.size() && sorted[k + 1] == sorted[j]) ++k;
    const double ecdf =
        static_cast<double>(k - i + 1) / static_cast<double>(n);
    const double model = 1.0 - std::pow(sorted[j] / lb, 1.0 - alpha);
    ks = std::max(ks, std::abs(ecdf - model));
    j = k + 1;
  }
  return TailFit{alpha, ks};
}

}  // namespace

PowerLawResult fit_power_law(std::vector<double> samples,
                             std::optional<double> fixed_x_min,
                             std::int64_t min_tail,
                             std::size_t max_scan_candidates) {
  for (double x : samples) {
    if (!(x > 0) || !std::isfinite(x)) {
      throw std::invalid_argument("power-law samples must be positive finite");
    }
  }
  const bool integer_data = all_integers(samples);
  std::sort(samples.begin(), samples.end());

  if (fixed_x_min.has_value()) {
    // Keep only the tail at or above the requested threshold.
    auto it = std::lower_bound(samples.begin(), samples.end(), *fixed_x_min);
    samples.erase(samples.begin(), it);
  }
  if (static_cast<std::int64_t>(samples.size()) < min_tail) {
    return PowerLawResult{std::nullopt, "too-few-samples"};
  }
  if (samples.front() == samples.back()) {
    return PowerLawResult{std::nullopt, "fit-undefined"};
  }

  std::vector<double> suffix_ln(samples.size() + 1, 0.0);
  for (std::size_t i = samples.size(); i-- > 0;) {
    suffix_ln[i] = suffix_ln[i + 1] + std::log(samples[i]);
  }

  if (fixed_x_min.has_value()) {
    // The threshold is the caller's; samples.front() may exceed it when the
    // exact value is absent, but the estimator is anchored at the request.
    const double x_min = *fixed_x_min;
    const double lb = integer_data ? x_min - 0.5 : x_min;
    if (lb <= 0) {
      throw std::invalid_argument("x_min too small for the data type");
    }
    const std::size_t n = samples.size();
    const double alpha =
        1.0 + static_cast<double>(n) /
                  (suffix_ln[0] - static_cast<double>(n) * std::log(lb));
    double ks = 0.0;
    std::size_t j = 0;
    while (j < n) {
      std::size_t k = j;
      while (k + 1 < n && samples[k + 1] == samples[j]) ++k;
      const double ecdf = static_cast<double>(k + 1) / static_cast<double>(n);
      const double model = 1.0 - std::pow(samples[j] / lb, 1.0 - alpha);
      ks = std::max(ks, std::abs(ecdf - model));
      j = k + 1;
    }
    return PowerLawResult{
        PowerLawFit{alpha, x_min, ks, static_cast<std::int64_t>(n)}, ""};
  }

  // Scan: indices where a new distinct value starts and the remaining tail
  // is still large enough.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i] == samples[i - 1]) continue;
    if (static_cast<std::int64_t>(samples.size() - i) < min_tail) break;
    starts.push_back(i);
  }
  if (starts.empty()) {
    return PowerLawResult{std::nullopt, "too-few-samples"};
  }
  // Thin to a bounded candidate set; evenly spaced over the distinct values,
  // always keeping the smallest.
  std::vector<std::size_t> candidates;
  if (starts.size() <= max_scan_candidates) {
    candidates = starts;
  } else {
    candidates.reserve(max_scan_candidates);
    const double stride = static_cast<double>(starts.size() - 1) /
                          static_cast<double>(max_scan_candidates - 1);
    std::size_t last_taken = starts.size();  // sentinel
    for (std::size_t j = 0; j < max_scan_candidates; ++j) {
      const auto idx = static_cast<std::size_t>(
          std::llround(static_cast<double>(j) * stride));
      if (idx != last_taken) {
        candidates.push_back(starts[idx]);
        last_taken = idx;
      }
    }
  }

  bool have_best = false;
  TailFit best{0, 0};
  double best_x_min = 0;
  std::size_t best_i = 0;
  for (std::size_t i : candidates) {
    if (integer_data && samples[i] - 0.5 <= 0) continue;
    const TailFit f = fit_tail(samples, suffix_ln, i, integer_data);
    // Degenerate alpha (all-equal tails are excluded already, but guard).
    if (!std::isfinite(f.alpha)) continue;
    if (!have_best || f.ks < best.ks - 1e-15) {
      have_best = true;
      best = f;
      best_x_min = samples[i];
      best_i = i;
    }
  }
  if (!have_best) {
    return PowerLawResult{std::nullopt, "fit-undefined"};
  }
  return PowerLawResult{
      PowerLawFit{best.alpha, best_x_min, best.ks,
                  static_cast<std::int64_t>(samples.size() - best_i)},
      ""};
}

DegreeStats degree_stats(const std::vector<Transaction>& txs) {
  // Role-prefixed keys keep a buyer and seller sharing an id distinct.
  std::map<std::string, std::int64_t> degree;
  for (const Transaction& t : txs) {
    ++degree["B:" + t.buyer_id];
    ++degree["S:" + t.seller_id];
  }
  DegreeStats stats;
  if (degree.empty()) return stats;
  std::int64_t total = 0;
  for (const auto& [node, d] : degree) {
    total += d;
    ++stats.histogram[d];
    stats.degrees.push_back(static_cast<double>(d));
  }
  stats.average =
      static_cast<double>(total) / static_cast<double>(degree.size());
  return stats;
}

std::optional<double> autocorr_lag1(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) return std::nullopt;
  // Scaled deviations d_t = n*x_t - S keep integer series exact.
  double s = 0;
  for (double x : series) s += x;
  double num = 0, den = 0;
  double prev = static_cast<double>(n) * series[0] - s;
  den = prev * prev;
  for (std::size_t t = 1; t < n; ++t) {
    const double d = static_cast<double>(n) * series[t] - s;
    num += prev * d;
    den += d * d;
    prev = d;
  }
  if (den == 0) return std::nullopt;  // constant series
  return num / den;
}

TrendMatrix trend_matrix(
    const std::vector<Transaction>& txs,
    const std::map<std::string, std::string>& dataset_field, Step first_step,
    Step last_step) {
  TrendMatrix m;
  m.first_step = first_step;
  m.last_step = last_step;
  if (last_step < first_step) {
    throw std::invalid_argument("trend_matrix: empty step range");
  }
  const std::size_t n_steps =
      static_cast<std::size_t>(last_step - first_step + 1);

  std::set<std::string> field_set;
  std::set<std::string> unmapped;
  auto field_of = [&](const std::string& dataset_id) -> std::string {
    auto it = dataset_field.find(dataset_id);
    if (it == dataset_field.end()) {
      unmapped.insert(dataset_id);
      return "other";
    }
    return it->second;
  };
  for (const Transaction& t : txs) field_set.insert(field_of(t.dataset_id));
  for (const auto& id : unmapped) {
    m.warnings.push_back("dataset " + id +
                         " has no field mapping; counted as 'other'");
  }
  m.fields.assign(field_set.begin(), field_set.end());

  Eigen::MatrixXd counts =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.fields.size()),
                            static_cast<Eigen::Index>(n_steps));
  for (const Transaction& t : txs) {
    if (t.step < first_step || t.step > last_step) continue;
    const std::string f = field_of(t.dataset_id);
    const auto row = static_cast<Eigen::Index>(
        std::lower_bound(m.fields.begin(), m.fields.end(), f) -
        m.fields.begin());
    counts(row, t.step - first_step) += 1.0;
  }

  // Normalizing by the busiest step's total makes that column sum to 1 and
  // scales every other column by its relative activity.
  double max_total = 0;
  for (Eigen::Index c = 0; c < counts.cols(); ++c) {
    max_total = std::max(max_total, counts.col(c).sum());
  }
  m.values = max_total > 0 ? Eigen::MatrixXd(counts / max_total) : counts;
  return m;
}

std::map<std::string, ActionRatioSeries> action_ratio_series(
    const std::vector<nlohmann::json>& events) {
  // role -> step -> action -> count
  std::map<std::string, std::map<Step, std::map<std::string, std::int64_t>>>
      tallies;
  Step lo = std::numeric_limits<Step>::max();
  Step hi = std::numeric_limits<Step>::min();
  for (const auto& e : events) {
    if (e.value("type", "") != "action") continue;
    const Step step = e.at("step").get<Step>();
    tallies[e.at("role").get<std::string>()][step]
           [e.at("action").get<std::string>()] += 1;
    lo = std::min(lo, step);
    hi = std::max(hi, step);
  }

  std::map<std::string, ActionRatioSeries> out;
  for (const auto& [role, per_step] : tallies) {
    ActionRatioSeries series;
    std::set<std::string> actions;
    for (const auto& [step, acts] : per_step) {
      for (const auto& [a, n] : acts) actions.insert(a);
    }
    series.actions.assign(actions.begin(), actions.end());
    for (Step s = lo; s <= hi; ++s) series.steps.push_back(s);
    series.shares = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(series.actions.size()),
        static_cast<Eigen::Index>(series.steps.size()),
        std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < series.steps.size(); ++c) {
      auto it = per_step.find(series.steps[c]);
      if (it == per_step.end()) continue;  // gap: the role took no turn
      double total = 0;
      for (const auto& [a, n] : it->second) total += static_cast<double>(n);
      for (std::size_t r = 0; r < series.actions.size(); ++r) {
        auto jt = it->second.find(series.actions[r]);
        const double n =
            jt == it->second.end() ? 0.0 : static_cast<double>(jt->second);
        series.shares(static_cast<Eigen::Index>(r),
                      static_cast<Eigen::Index>(c)) = n / total;
      }
    }
    out.emplace(role, std::move(series));
  }
  return out;
}

AnalysisInput analysis_from_events(std::vector<nlohmann::json> events,
                                   std::string source) {
  AnalysisInput input;
  input.source = std::move(source);
  Step last = 0;
  for (const auto& e : events) {
    const std::string type = e.value("type", "");
    if (type == "transaction") {
      Transaction t;
      t.step = e.at("step").get<Step>();
      t.buyer_id = e.at("buyer").get<std::string>();
      t.seller_id = e.at("seller").get<std::string>();
      t.dataset_id = e.at("dataset").get<std::string>();
      t.version = e.at("version").get<int>();
      t.price = e.at("price").get<double>();
      input.txs.push_back(std::move(t));
    } else if (type == "listing") {
      input.dataset_field[e.at("dataset").get<std::string>()] =
          e.at("field").get<std::string>();
    }
    if (e.contains("step")) last = std::max(last, e.at("step").get<Step>());
  }
  // Step 0 is initialization; per-step series start at the first live step.
  input.first_step = 1;
  input.last_step = std::max<Step>(1, last);
  input.events = std::move(events);
  return input;
}

AnalysisInput analysis_from_transactions(std::vector<Transaction> txs,
                                         std::string source) {
  AnalysisInput input;
  input.source = std::move(source);
  if (!txs.empty()) {
    Step lo = txs.front().step, hi = txs.front().step;
    for (const Transaction& t : txs) {
      lo = std::min(lo, t.step);
      hi = std::max(hi, t.step);
    }
    input.first_step = lo;
    input.last_step = hi;
  }
  // A bare transaction log carries no field mapping; the trend matrix will
  // bucket everything under "other".
  input.txs = std::move(txs);
  return input;
}

std::vector<double> transactions_per_step(const AnalysisInput& input) {
  std::vector<double> series(
      static_cast<std::size_t>(input.last_step - input.first_step + 1), 0.0);
  for (const Transaction& t : input.txs) {
    if (t.step < input.first_step || t.step > input.last_step) continue;
    series[static_cast<std::size_t>(t.step - input.first_step)] += 1.0;
  }
  return series;
}

namespace {

nlohmann::json fit_to_json(const PowerLawResult& r) {
  if (!r.ok()) return nlohmann::json{{"error", r.error}};
  return nlohmann::json{{"alpha", r.fit->alpha},
                        {"x_min", r.fit->x_min},
                        {"ks_distance", r.fit->ks_distance},
                        {"tail_n", r.fit->tail_n}};
}

nlohmann::json count_summary(const std::map<std::string, std::int64_t>& counts) {
  std::int64_t lo = 0, hi = 0, total = 0;
  std::map<std::int64_t, std::int64_t> value_freq;
  bool first = true;
  for (const auto& [key, n] : counts) {
    if (first) {
      lo = hi = n;
      first = false;
    }
    lo = std::min(lo, n);
    hi = std::max(hi, n);
    total += n;
    ++value_freq[n];
  }
  // Mode: most frequent count, smallest on ties.
  std::int64_t mode = 0, mode_freq = 0;
  for (const auto& [value, freq] : value_freq) {
    if (freq > mode_freq) {
      mode = value;
      mode_freq = freq;
    }
  }
  return nlohmann::json{
      {"min", lo},
      {"max", hi},
      {"mean", static_cast<double>(total) /
                   static_cast<double>(counts.empty() ? 1 : counts.size())},
      {"mode", mode}};
}

std::vector<double> count_samples(
    const std::map<std::string, std::int64_t>& counts) {
  std::vector<double> samples;
  samples.reserve(counts.size());
  for (const auto& [key, n] : counts) {
    samples.push_back(static_cast<double>(n));
  }
  return samples;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (std::isnan(v)) {
        row.push_back(nullptr);
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::json build_report(const AnalysisInput& input) {
  if (input.txs.empty()) {
    throw std::runtime_error("empty-log: no transactions in " + input.source);
  }

  nlohmann::json report;
  report["source"] = input.source;

  const auto per_dataset = purchases_per_dataset(input.txs);
  report["purchases_per_dataset"] = {
      {"counts", per_dataset},
      {"summary", count_summary(per_dataset)},
      {"fit", fit_to_json(fit_power_law(count_samples(per_dataset)))}};

  const auto per_buyer = purchases_per_buyer(input.txs);
  report["purchases_per_buyer"] = {
      {"counts", per_buyer},
      {"summary", count_summary(per_buyer)},
      {"fit", fit_to_json(fit_power_law(count_samples(per_buyer)))}};

  nlohmann::json repeats = nlohmann::json::object();
  for (const auto& [mult, pairs] : repeat_purchase_multiplicities(input.txs)) {
    repeats[std::to_string(mult)] = pairs;
  }
  report["repeat_purchases"] = std::move(repeats);

  const DegreeStats degrees = degree_stats(input.txs);
  nlohmann::json degree_hist = nlohmann::json::object();
  for (const auto& [d, n] : degrees.histogram) {
    degree_hist[std::to_string(d)] = n;
  }
  report["degree"] = {{"average", degrees.average},
                      {"histogram", std::move(degree_hist)},
                      {"fit", fit_to_json(fit_power_law(degrees.degrees))}};

  const auto series = transactions_per_step(input);
  const auto r1 = autocorr_lag1(series);
  if (r1.has_value()) {
    report["autocorr_lag1"] = *r1;
  } else {
    report["autocorr_lag1"] = nullptr;
  }
  report["transaction_series"] = {{"first_step", input.first_step},
                                  {"last_step", input.last_step},
                                  {"counts", series}};

  const TrendMatrix tm = trend_matrix(input.txs, input.dataset_field,
                                      input.first_step, input.last_step);
  report["trend_matrix"] = {{"fields", tm.fields},
                            {"first_step", tm.first_step},
                            {"last_step", tm.last_step},
                            {"values", matrix_to_json(tm.values)},
                            {"warnings", tm.warnings}};

  if (!input.events.empty()) {
    nlohmann::json ratios = nlohmann::json::object();
    for (const auto& [role, series_] : action_ratio_series(input.events)) {
      ratios[role] = {{"actions", series_.actions},
                      {"steps", series_.steps},
                      {"shares", matrix_to_json(series_.shares)}};
    }
    report["action_ratios"] = std::move(ratios);
  }

  std::set<std::string> buyers, sellers, datasets;
  for (const Transaction& t : input.txs) {
    buyers.insert(t.buyer_id);
    sellers.insert(t.seller_id);
    datasets.insert(t.dataset_id);
  }
  report["totals"] = {{"transactions", input.txs.size()},
                      {"buyers", buyers.size()},
                      {"sellers", sellers.size()},
                      {"datasets", datasets.size()}};
  return report;
}

namespace {

// The scalar leaves two reports are lined up on.
const std::vector<std::pair<const char*, std::vector<const char*>>>
    kComparablePaths = {
        {"purchases_per_dataset.fit.alpha",
         {"purchases_per_dataset", "fit", "alpha"}},
        {"purchases_per_dataset.fit.ks_distance",
         {"purchases_per_dataset", "fit", "ks_distance"}},
        {"purchases_per_dataset.summary.mean",
         {"purchases_per_dataset", "summary", "mean"}},
        {"purchases_per_buyer.fit.alpha",
         {"purchases_per_buyer", "fit", "alpha"}},
        {"purchases_per_buyer.summary.mean",
         {"purchases_per_buyer", "summary", "mean"}},
        {"purchases_per_buyer.summary.mode",
         {"purchases_per_buyer", "summary", "mode"}},
        {"degree.average", {"degree", "average"}},
        {"degree.fit.alpha", {"degree", "fit", "alpha"}},
        {"autocorr_lag1", {"autocorr_lag1"}},
        {"totals.transactions", {"totals", "transactions"}},
};

const nlohmann::json* walk(const nlohmann::json& j,
                           const std::vector<const char*>& path) {
  const nlohmann::json* cur = &j;
  for (const char* key : path) {
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &cur->at(key);
  }
  return cur->is_number() ? cur : nullptr;
}

}  // namespace

ComparisonResult compare_reports(const nlohmann::json& a,
                                 const nlohmann::json& b) {
  ComparisonResult result;
  result.table = nlohmann::json::array();
  for (const auto& [name, path] : kComparablePaths) {
    const nlohmann::json* va = walk(a, path);
    const nlohmann::json* vb = walk(b, path);
    nlohmann::json row{{"metric", name}};
    if (va == nullptr || vb == nullptr) {
      row["a"] = va == nullptr ? nlohmann::json(nullptr) : *va;
      row["b"] = vb == nullptr ? nlohmann::json(nullptr) : *vb;
      // A metric absent from both sides (say, a fit that failed on both
      // logs) is skipped, not flagged: only an asymmetric hole means the
      // reports are not comparable.
      if ((va == nullptr) != (vb == nullptr)) {
        row["error"] = "missing";
        result.mismatch = true;
      } else {
        row["error"] = "absent in both";
      }
    } else {
      const double da = va->get<double>();
      const double db = vb->get<double>();
      const double abs_delta = std::abs(da - db);
      const double scale = std::max(std::abs(da), std::abs(db));
      row["a"] = da;
      row["b"] = db;
      row["abs_delta"] = abs_delta;
      if (scale > 0) {
        row["rel_delta"] = abs_delta / scale;
      } else {
        row["rel_delta"] = 0.0;
      }
    }
    result.table.push_back(std::move(row));
  }
  return result;
}

}  // namespace dmsim
