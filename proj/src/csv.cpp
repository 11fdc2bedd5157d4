#include "panelbreak/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace panelbreak {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t row_no,
                              const std::string& path) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    std::string cell = line.substr(pos, comma == std::string::npos
                                            ? std::string::npos
                                            : comma - pos);
    // trim spaces
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    if (a == std::string::npos) {
      throw DataError(path + ": row " + std::to_string(row_no) + ": empty cell");
    }
    cell = cell.substr(a, b - a + 1);
    double v;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw DataError(path + ": row " + std::to_string(row_no) +
                      ": cannot parse '" + cell + "' as a number");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

PanelData read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  PanelData panel;
  std::string line;
  std::size_t row_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto row = parse_row(line, row_no, path);
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path + ": row " + std::to_string(row_no) + ": expected " +
                      std::to_string(rows.front().size()) + " columns, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  panel.m = rows.size();
  panel.n = rows.front().size();
  panel.values.reserve(panel.m * panel.n);
  for (const auto& r : rows)
    panel.values.insert(panel.values.end(), r.begin(), r.end());
  return panel;
}

void read_covariates_csv(const std::string& path, PanelData& panel) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t row_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto row = parse_row(line, row_no, path);
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path + ": row " + std::to_string(row_no) +
                      ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.size() != panel.m * panel.n)
    throw DataError(path + ": expected " + std::to_string(panel.m * panel.n) +
                    " covariate rows (m*n), got " + std::to_string(rows.size()));
  panel.d = rows.front().size();
  panel.covariates.clear();
  panel.covariates.reserve(rows.size() * panel.d);
  for (const auto& r : rows)
    panel.covariates.insert(panel.covariates.end(), r.begin(), r.end());
}

void write_panel_csv(const std::string& path, const PanelData& panel) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.precision(17);
  for (std::size_t k = 0; k < panel.m; ++k) {
    for (std::size_t t = 0; t < panel.n; ++t) {
      if (t) out << ',';
      out << panel.x(k, t);
    }
    out << '\n';
  }
}

void write_covariates_csv(const std::string& path, const PanelData& panel) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.precision(17);
  for (std::size_t k = 0; k < panel.m; ++k)
    for (std::size_t t = 0; t < panel.n; ++t) {
      auto cv = panel.cov(k, t);
      for (std::size_t j = 0; j < panel.d; ++j) {
        if (j) out << ',';
        out << cv[j];
      }
      out << '\n';
    }
}

void write_profile_csv(const std::string& path, const BreakEstimate& est) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.precision(17);
  out << "b_index,criterion\n";
  for (std::size_t i = 0; i < est.profile.size(); ++i)
    out << (est.profile_lo + i) << ',' << est.profile[i] << '\n';
}

}  // namespace panelbreak
