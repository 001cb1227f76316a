#include "sdwave/csv.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdwave {

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string csv_header(const CsvMeta& meta,
                       const std::vector<std::string>& columns) {
  std::ostringstream out;
  out << "# config_hash: " << hex64(meta.config_hash) << "\n";
  out << "# seed: " << meta.seed << "\n";
  out << "# modes: " << meta.modes << "\n";
  for (const auto& [key, value] : meta.extra)
    out << "# " << key << ": " << value << "\n";
  if (meta.timestamp) out << "# generated_at: " << utc_now() << "\n";
  out << "# columns: " << join(columns) << "\n";
  out << join(columns) << "\n";
  return out.str();
}

std::string format_csv(const CsvMeta& meta,
                       const std::vector<std::string>& columns,
                       const Eigen::MatrixXd& rows) {
  if (rows.size() > 0 &&
      rows.cols() != static_cast<Eigen::Index>(columns.size()))
    throw std::invalid_argument("csv: row width does not match columns");
  std::string out = csv_header(meta, columns);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j) out += ',';
      out += csv_number(rows(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string format_csv_rows(
    const CsvMeta& meta, const std::vector<std::string>& columns,
    const std::vector<std::vector<std::string>>& rows) {
  std::string out = csv_header(meta, columns);
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("csv: row width does not match columns");
    out += join(row);
    out += '\n';
  }
  return out;
}

std::string strip_volatile_lines(const std::string& document) {
  std::istringstream in(document);
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("# generated_at:", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace sdwave
