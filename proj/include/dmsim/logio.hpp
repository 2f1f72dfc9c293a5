#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dmsim/types.hpp"

namespace dmsim {

// Streams transaction rows to CSV as the run produces them (append-only).
class TransactionCsvWriter {
 public:
  explicit TransactionCsvWriter(const std::string& path);
  void append(const Transaction& t);

 private:
  std::ofstream out_;
};

void write_transactions_csv(const std::string& path,
                            const std::vector<Transaction>& txs);

// Strict reader for the writer's format; throws std::runtime_error naming
// the offending line.
std::vector<Transaction> read_transactions_csv(const std::string& path);

// Prices are integers in simulated runs but can be fractional in ingested
// data; format without trailing noise either way, round-tripping exactly.
std::string format_price(double price);

// Per-figure CSV series derived from a metrics report, written into `dir`:
// distribution, degree, per-step, trend-matrix and action-ratio tables.
void write_metric_csvs(const nlohmann::json& report, const std::string& dir);

}  // namespace dmsim
