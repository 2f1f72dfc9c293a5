#include "dmsim/logio.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dmsim {

namespace {

constexpr const char* kHeader = "step,buyer_id,seller_id,dataset_id,version,price";

std::vector<std::string> split_csv_line(const std::string& line) {
  // Our ids never contain commas or quotes; plain splitting is exact.
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

std::string format_price(double price) {
  if (std::floor(price) == price && std::abs(price) < 9.0e15) {
    return std::to_string(static_cast<long long>(price));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), price);
  if (ec != std::errc()) throw std::runtime_error("price formatting failed");
  return std::string(buf, ptr);
}

TransactionCsvWriter::TransactionCsvWriter(const std::string& path)
    : out_(path, std::ios::trunc) {
  if (!out_) {
    throw std::runtime_error("cannot open transaction log for write: " + path);
  }
  out_ << kHeader << '\n';
  out_.flush();
}

void TransactionCsvWriter::append(const Transaction& t) {
  out_ << t.step << ',' << t.buyer_id << ',' << t.seller_id << ','
       << t.dataset_id << ',' << t.version << ',' << format_price(t.price)
       << '\n';
  out_.flush();
}

void write_transactions_csv(const std::string& path,
                            const std::vector<Transaction>& txs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open transaction log for write: " + path);
  }
  out << kHeader << '\n';
  for (const Transaction& t : txs) {
    out << t.step << ',' << t.buyer_id << ',' << t.seller_id << ','
        << t.dataset_id << ',' << t.version << ',' << format_price(t.price)
        << '\n';
  }
}

std::vector<Transaction> read_transactions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open transaction log: " + path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Transaction> txs;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kHeader) {
        throw std::runtime_error(path + ": unexpected header '" + line + "'");
      }
      saw_header = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 6 columns, got " +
                               std::to_string(cells.size()));
    }
    try {
      Transaction t;
      t.step = static_cast<Step>(std::stol(cells[0]));
      t.buyer_id = cells[1];
      t.seller_id = cells[2];
      t.dataset_id = cells[3];
      t.version = std::stoi(cells[4]);
      t.price = std::stod(cells[5]);
      txs.push_back(std::move(t));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed row '" + line + "'");
    }
  }
  if (!saw_header) {
    throw std::runtime_error(path + ": missing header row");
  }
  return txs;
}

namespace {

void write_histogram_csv(const std::string& path, const nlohmann::json& counts,
                         const char* value_name, const char* freq_name) {
  // counts: {key: n}; the histogram tallies how many keys share each n.
  std::map<std::int64_t, std::int64_t> freq;
  for (const auto& [key, n] : counts.items()) {
    ++freq[n.get<std::int64_t>()];
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << value_name << ',' << freq_name << '\n';
  for (const auto& [value, count] : freq) out << value << ',' << count << '\n';
}

}  // namespace

void write_metric_csvs(const nlohmann::json& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto path = [&dir](const char* name) {
    return (fs::path(dir) / name).string();
  };

  write_histogram_csv(path("dist_purchases_per_dataset.csv"),
                      report.at("purchases_per_dataset").at("counts"),
                      "purchases", "datasets");
  write_histogram_csv(path("dist_purchases_per_buyer.csv"),
                      report.at("purchases_per_buyer").at("counts"),
                      "purchases", "buyers");

  {
    std::ofstream out(path("dist_repeat_purchases.csv"), std::ios::trunc);
    out << "multiplicity,pairs\n";
    for (const auto& [mult, pairs] : report.at("repeat_purchases").items()) {
      out << mult << ',' << pairs.get<std::int64_t>() << '\n';
    }
  }
  {
    std::ofstream out(path("degree_distribution.csv"), std::ios::trunc);
    out << "degree,nodes\n";
    for (const auto& [degree, nodes] :
         report.at("degree").at("histogram").items()) {
      out << degree << ',' << nodes.get<std::int64_t>() << '\n';
    }
  }
  {
    std::ofstream out(path("transactions_per_step.csv"), std::ios::trunc);
    out << "step,transactions\n";
    const auto& series = report.at("transaction_series");
    const Step first = series.at("first_step").get<Step>();
    const auto& counts = series.at("counts");
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out << (first + static_cast<Step>(i)) << ','
          << counts[i].get<double>() << '\n';
    }
  }
  {
    std::ofstream out(path("trend_matrix.csv"), std::ios::trunc);
    out << "field,step,value\n";
    const auto& tm = report.at("trend_matrix");
    const Step first = tm.at("first_step").get<Step>();
    const auto& fields = tm.at("fields");
    const auto& values = tm.at("values");
    for (std::size_t r = 0; r < fields.size(); ++r) {
      for (std::size_t c = 0; c < values[r].size(); ++c) {
        out << fields[r].get<std::string>() << ','
            << (first + static_cast<Step>(c)) << ','
            << values[r][c].get<double>() << '\n';
      }
    }
  }
  if (report.contains("action_ratios")) {
    for (const auto& [role, series] : report.at("action_ratios").items()) {
      std::ofstream out(path(("action_ratio_" + role + ".csv").c_str()),
                        std::ios::trunc);
      out << "step,action,share\n";
      const auto& actions = series.at("actions");
      const auto& steps = series.at("steps");
      const auto& shares = series.at("shares");
      for (std::size_t c = 0; c < steps.size(); ++c) {
        for (std::size_t r = 0; r < actions.size(); ++r) {
          const auto& cell = shares[r][c];
          if (cell.is_null()) continue;  // gap, not zero
          out << steps[c].get<Step>() << ',' << actions[r].get<std::string>()
              << ',' << cell.get<double>() << '\n';
        }
      }
    }
  }
}

}  // namespace dmsim
