#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmsim/types.hpp"

namespace dmsim {

// One marketplace export row (CSV or JSONL), as published on-chain.
struct RawTransactionRecord {
  std::string order_id;
  std::string transaction_hash;
  std::string datatoken_address;
  std::string payer_address;
  double amount = 0;
  double price = 0;
  std::int64_t timestamp = 0;  // unix seconds
};

struct IngestResult {
  std::vector<Transaction> txs;
  std::int64_t dropped_duplicates = 0;
  std::int64_t dropped_malformed = 0;
  std::vector<std::string> warnings;
};

// Normalizes raw records into the simulator's transaction schema: the payer
// becomes the buyer, the datatoken address identifies both the dataset and
// (as a proxy) its seller, timestamps are binned into steps of
// `bin_width_seconds` from the earliest record, and version is fixed at 1
// (the export carries no versioning). Records reusing an order_id are
// dropped with a warning. Throws std::runtime_error("ingest-failed: ...")
// when no valid record remains.
IngestResult ingest_records(const std::vector<RawTransactionRecord>& records,
                            std::int64_t bin_width_seconds);

// Reads raw records from a CSV (header row with the export column names
// above) or JSONL file. format: "csv", "jsonl" or "auto" (by extension).
// Malformed rows are dropped with a line-numbered warning.
IngestResult ingest_file(const std::string& path, const std::string& format,
                         std::int64_t bin_width_seconds);

// "1d", "6h", "30m", "45s" or bare seconds; throws std::invalid_argument
// on anything else or a non-positive width.
std::int64_t parse_bin_width(const std::string& text);

}  // namespace dmsim
