#include "dmsim/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dmsim {

std::int64_t parse_bin_width(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty bin width");
  std::int64_t scale = 1;
  std::string digits = text;
  switch (text.back()) {
    case 'd':
      scale = 86400;
      digits.pop_back();
      break;
    case 'h':
      scale = 3600;
      digits.pop_back();
      break;
    case 'm':
      scale = 60;
      digits.pop_back();
      break;
    case 's':
      scale = 1;
      digits.pop_back();
      break;
    default:
      break;
  }
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    throw std::invalid_argument("bad bin width '" + text +
                                "' (use e.g. 1d, 6h, 30m, 45s or seconds)");
  }
  const std::int64_t value = std::stoll(digits) * scale;
  if (value <= 0) throw std::invalid_argument("bin width must be positive");
  return value;
}

IngestResult ingest_records(const std::vector<RawTransactionRecord>& records,
                            std::int64_t bin_width_seconds) {
  if (bin_width_seconds <= 0) {
    throw std::invalid_argument("bin width must be positive");
  }
  IngestResult result;
  std::set<std::string> seen_orders;
  std::vector<const RawTransactionRecord*> kept;
  std::int64_t min_ts = 0;
  bool have_ts = false;
  for (const RawTransactionRecord& r : records) {
    if (!seen_orders.insert(r.order_id).second) {
      ++result.dropped_duplicates;
      result.warnings.push_back("duplicate order_id " + r.order_id +
                                " dropped");
      continue;
    }
    kept.push_back(&r);
    if (!have_ts || r.timestamp < min_ts) {
      min_ts = r.timestamp;
      have_ts = true;
    }
  }
  if (kept.empty()) {
    throw std::runtime_error("ingest-failed: no valid records");
  }
  for (const RawTransactionRecord* r : kept) {
    Transaction t;
    t.step = static_cast<Step>((r->timestamp - min_ts) / bin_width_seconds);
    t.buyer_id = r->payer_address;
    // The datatoken contract identifies the asset; it also stands in for
    // the seller, which the export does not carry directly.
    t.seller_id = r->datatoken_address;
    t.dataset_id = r->datatoken_address;
    t.version = 1;
    t.price = r->price;
    result.txs.push_back(std::move(t));
  }
  return result;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

struct ParsedRows {
  std::vector<RawTransactionRecord> records;
  std::int64_t dropped_malformed = 0;
  std::vector<std::string> warnings;
};

ParsedRows parse_csv(std::ifstream& in, const std::string& path) {
  ParsedRows out;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> columns;
  // Only the columns the normalized mapping consumes are mandatory;
  // transaction_hash and amount ride along when present.
  const std::vector<std::string> required = {
      "order_id", "datatoken_address", "payer_address", "price", "timestamp"};
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (columns.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) columns[cells[i]] = i;
      for (const auto& name : required) {
        if (columns.find(name) == columns.end()) {
          throw std::runtime_error(path + ": header lacks column '" + name +
                                   "'");
        }
      }
      continue;
    }
    try {
      if (cells.size() < columns.size()) throw std::runtime_error("short row");
      RawTransactionRecord r;
      r.order_id = cells[columns.at("order_id")];
      if (auto it = columns.find("transaction_hash"); it != columns.end()) {
        r.transaction_hash = cells[it->second];
      }
      r.datatoken_address = cells[columns.at("datatoken_address")];
      r.payer_address = cells[columns.at("payer_address")];
      if (auto it = columns.find("amount"); it != columns.end()) {
        r.amount = std::stod(cells[it->second]);
      }
      r.price = std::stod(cells[columns.at("price")]);
      r.timestamp = static_cast<std::int64_t>(
          std::stod(cells[columns.at("timestamp")]));
      if (r.order_id.empty() || r.datatoken_address.empty() ||
          r.payer_address.empty()) {
        throw std::runtime_error("missing identifier");
      }
      out.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++out.dropped_malformed;
      out.warnings.push_back(path + ":" + std::to_string(line_no) +
                             ": dropped malformed row (" + e.what() + ")");
    }
  }
  if (columns.empty()) {
    throw std::runtime_error(path + ": empty file, no header row");
  }
  return out;
}

ParsedRows parse_jsonl(std::ifstream& in, const std::string& path) {
  ParsedRows out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      ++out.dropped_malformed;
      out.warnings.push_back(path + ":" + std::to_string(line_no) +
                             ": dropped non-JSON row");
      continue;
    }
    try {
      RawTransactionRecord r;
      r.order_id = j.at("order_id").get<std::string>();
      r.transaction_hash = j.value("transaction_hash", "");
      r.datatoken_address = j.at("datatoken_address").get<std::string>();
      r.payer_address = j.at("payer_address").get<std::string>();
      r.amount = j.value("amount", 0.0);
      r.price = j.at("price").get<double>();
      r.timestamp = static_cast<std::int64_t>(j.at("timestamp").get<double>());
      if (r.order_id.empty() || r.datatoken_address.empty() ||
          r.payer_address.empty()) {
        throw std::runtime_error("missing identifier");
      }
      out.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++out.dropped_malformed;
      out.warnings.push_back(path + ":" + std::to_string(line_no) +
                             ": dropped malformed row (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace

IngestResult ingest_file(const std::string& path, const std::string& format,
                         std::int64_t bin_width_seconds) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string kind = format;
  if (kind == "auto") {
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
      kind = "jsonl";
    } else {
      kind = "csv";
    }
  }
  ParsedRows rows;
  if (kind == "csv") {
    rows = parse_csv(in, path);
  } else if (kind == "jsonl") {
    rows = parse_jsonl(in, path);
  } else {
    throw std::invalid_argument("unknown ingest format '" + format + "'");
  }
  if (rows.records.empty()) {
    throw std::runtime_error("ingest-failed: no valid records in " + path);
  }
  IngestResult result = ingest_records(rows.records, bin_width_seconds);
  result.dropped_malformed = rows.dropped_malformed;
  result.warnings.insert(result.warnings.begin(), rows.warnings.begin(),
                         rows.warnings.end());
  return result;
}

}  // namespace dmsim
