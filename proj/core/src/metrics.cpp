// SPDX-License-Identifier: Apache-2.0
#include "vidledger/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace vidledger::metrics {

namespace {
std::string fmt_ms(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double parse_double(std::string_view s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("metrics line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
}
}  // namespace

std::string csv_row(const TransactionTiming& row) {
  std::string out = row.camera.hex();
  out += ',';
  out += std::to_string(row.sequence);
  for (double v : {row.steps.extract_ms, row.steps.store_ms, row.steps.sign_ms, row.steps.append_ms,
                   row.steps.total_ms}) {
    out += ',';
    out += fmt_ms(v);
  }
  return out;
}

std::vector<TransactionTiming> parse_csv(std::string_view text) {
  std::vector<TransactionTiming> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == kCsvHeader) continue;
    std::vector<std::string_view> cols;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 7) throw std::runtime_error("metrics line " + std::to_string(lineno) + ": expected 7 columns");
    TransactionTiming t;
    auto key = PublicKey::from_hex(cols[0]);
    if (!key) throw std::runtime_error("metrics line " + std::to_string(lineno) + ": bad camera key");
    t.camera = *key;
    const auto [p, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), t.sequence);
    if (ec != std::errc{} || p != cols[1].data() + cols[1].size())
      throw std::runtime_error("metrics line " + std::to_string(lineno) + ": bad sequence");
    t.steps.extract_ms = parse_double(cols[2], lineno);
    t.steps.store_ms = parse_double(cols[3], lineno);
    t.steps.sign_ms = parse_double(cols[4], lineno);
    t.steps.append_ms = parse_double(cols[5], lineno);
    t.steps.total_ms = parse_double(cols[6], lineno);
    rows.push_back(t);
  }
  return rows;
}

CsvMetrics::CsvMetrics(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open metrics file " + path.string());
  out_ << kCsvHeader << '\n';
}

void CsvMetrics::record(const TransactionTiming& row) {
  std::lock_guard lock(mutex_);
  out_ << csv_row(row) << '\n';
}

void CsvMetrics::flush() {
  std::lock_guard lock(mutex_);
  out_.flush();
}

void MemoryMetrics::record(const TransactionTiming& row) {
  std::lock_guard lock(mutex_);
  rows_.push_back(row);
}

std::vector<TransactionTiming> MemoryMetrics::rows() const {
  std::lock_guard lock(mutex_);
  return rows_;
}

void MemoryMetrics::clear() {
  std::lock_guard lock(mutex_);
  rows_.clear();
}

}  // namespace vidledger::metrics
