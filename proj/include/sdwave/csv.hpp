#pragma once

// CSV emission with a provenance header block. Every file starts with
// comment lines echoing the config hash, master seed, truncation size, and
// column list; the generated_at timestamp line is informational and excluded
// from the determinism contract. Numbers are printed with %.17g so reruns
// with identical inputs produce identical value bytes.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sdwave {

struct CsvMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int modes = 0;
  bool timestamp = true;
  // Extra provenance lines, emitted as "# key: value" in order.
  std::vector<std::pair<std::string, std::string>> extra;
};

// Shortest exact decimal form of one value.
std::string csv_number(double v);

// Header block: provenance comments, then the column-name row.
std::string csv_header(const CsvMeta& meta,
                       const std::vector<std::string>& columns);

// Full document from a numeric table (one matrix row per record).
std::string format_csv(const CsvMeta& meta,
                       const std::vector<std::string>& columns,
                       const Eigen::MatrixXd& rows);

// Full document from pre-rendered cells, for tables with text columns.
std::string format_csv_rows(const CsvMeta& meta,
                            const std::vector<std::string>& columns,
                            const std::vector<std::vector<std::string>>& rows);

// Strips provenance lines that are excluded from determinism (generated_at),
// for byte comparisons between reruns.
std::string strip_volatile_lines(const std::string& document);

void write_file(const std::string& path, const std::string& content);

}  // namespace sdwave
