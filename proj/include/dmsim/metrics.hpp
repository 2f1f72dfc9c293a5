#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "dmsim/types.hpp"

namespace dmsim {

// --- histogram primitives ---------------------------------------------------

std::map<std::string, std::int64_t> purchases_per_dataset(
    const std::vector<Transaction>& txs);
std::map<std::string, std::int64_t> purchases_per_buyer(
    const std::vector<Transaction>& txs);

// How often the same buyer bought the same dataset k times:
// multiplicity -> number of (buyer, dataset) pairs.
std::map<std::int64_t, std::int64_t> repeat_purchase_multiplicities(
    const std::vector<Transaction>& txs);

// --- power-law fit ----------------------------------------------------------

struct PowerLawFit {
  double alpha = 0;
  double x_min = 0;
  double ks_distance = 0;
  std::int64_t tail_n = 0;
};

// Fit or a coded error ("too-few-samples", "fit-undefined").
struct PowerLawResult {
  std::optional<PowerLawFit> fit;
  std::string error;
  bool ok() const { return fit.has_value(); }
};

// Continuous-correction maximum-likelihood estimate of the tail exponent:
// alpha = 1 + n / sum(ln(x_i / lb)) with lb = x_min - 0.5 when every sample
// is an integer (count data) and lb = x_min otherwise. With no fixed x_min
// the candidate x_mins are scanned (distinct sample values, thinned to at
// most `max_scan_candidates`, tails of at least `min_tail`) and the one
// minimizing the KS distance wins; KS ties resolve to the smallest x_min.
// The KS distance is the max over distinct tail values of
// |ecdf - (1 - (x/lb)^(1-alpha))|.
PowerLawResult fit_power_law(std::vector<double> samples,
                             std::optional<double> fixed_x_min = std::nullopt,
                             std::int64_t min_tail = 10,
                             std::size_t max_scan_candidates = 1024);

// --- graph + series metrics -------------------------------------------------

struct DegreeStats {
  double average = 0;  // 2T / N over nodes incident to >= 1 transaction
  std::map<std::int64_t, std::int64_t> histogram;  // degree -> node count
  std::vector<double> degrees;  // per node, for fitting
};

// Bipartite buyer–seller multigraph: each transaction is one edge.
DegreeStats degree_stats(const std::vector<Transaction>& txs);

// Lag-1 autocorrelation with the global mean. Undefined (nullopt) for
// series shorter than 2 or constant. Computed via the scaled-deviation form
// sum((n x_t - S)(n x_{t+1} - S)) / sum((n x_t - S)^2), algebraically equal
// to the textbook estimator but exact for small integer series.
std::optional<double> autocorr_lag1(const std::vector<double>& series);

// --- field-by-step trend matrix ---------------------------------------------

struct TrendMatrix {
  std::vector<std::string> fields;  // row labels, sorted; may include "other"
  Step first_step = 0;
  Step last_step = 0;
  // cell(f, t) = transactions in field f at step t / busiest step's total;
  // the busiest column therefore sums to 1.
  Eigen::MatrixXd values;
  std::vector<std::string> warnings;  // e.g. unmapped datasets
};

TrendMatrix trend_matrix(const std::vector<Transaction>& txs,
                         const std::map<std::string, std::string>& dataset_field,
                         Step first_step, Step last_step);

// --- action mix over time ---------------------------------------------------

struct ActionRatioSeries {
  std::vector<std::string> actions;  // row labels, sorted
  std::vector<Step> steps;
  // share(action, step) in [0,1]; NaN marks steps where the role took no
  // actions at all (a gap, not a zero).
  Eigen::MatrixXd shares;
};

// Per-role action shares from an event log (entries with type "action").
std::map<std::string, ActionRatioSeries> action_ratio_series(
    const std::vector<nlohmann::json>& events);

// --- whole-log analysis -----------------------------------------------------

// Everything the analyzer needs, already parsed. Exactly one of the two
// loaders below fills it.
struct AnalysisInput {
  std::vector<Transaction> txs;
  std::map<std::string, std::string> dataset_field;
  std::vector<nlohmann::json> events;  // empty for bare transaction logs
  Step first_step = 0;
  Step last_step = 0;
  std::string source;
};

AnalysisInput analysis_from_events(std::vector<nlohmann::json> events,
                                   std::string source);
AnalysisInput analysis_from_transactions(std::vector<Transaction> txs,
                                         std::string source);

// Per-step transaction counts over [first_step, last_step], zeros filled.
std::vector<double> transactions_per_step(const AnalysisInput& input);

// The full metrics report as a JSON document (stable key order). Throws
// std::runtime_error("empty-log: ...") when there are no transactions.
nlohmann::json build_report(const AnalysisInput& input);

// Side-by-side deltas of two reports. `mismatch` is set when either report
// lacks a comparable metric the other has.
struct ComparisonResult {
  nlohmann::json table;  // array of {metric, a, b, abs_delta, rel_delta}
  bool mismatch = false;
};

ComparisonResult compare_reports(const nlohmann::json& a,
                                 const nlohmann::json& b);

}  // namespace dmsim
