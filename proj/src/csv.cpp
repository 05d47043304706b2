#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "otfs/dataset.hpp"
#include "otfs/error.hpp"

namespace otfs {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::vector<std::string>> parse_records(const std::string& text, const std::string& path) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_record = [&]() {
    record.push_back(std::move(field));
    field.clear();
    // A blank line is not a record.
    if (!(record.size() == 1 && record[0].empty() && !field_started)) records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quotes) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError(path + ": unterminated quoted field at line " + std::to_string(line));
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

CsvTable read_csv_table(const std::string& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.erase(0, 3);
  }
  auto records = parse_records(text, path);
  if (records.empty()) throw DataError(path + ": empty file");

  CsvTable table;
  std::size_t first = 0;
  if (has_header) {
    table.header = records[0];
    for (auto& h : table.header) h = trim(h);
    first = 1;
  }
  const std::size_t width = records[0].size();
  for (std::size_t r = first; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw DataError(path + ": record " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                      " fields, expected " + std::to_string(width));
    }
    table.rows.push_back(std::move(records[r]));
  }
  if (table.rows.empty()) throw DataError(path + ": no data rows");
  return table;
}

Dataset load_csv(const std::string& path, bool has_header, const std::optional<std::string>& label_column) {
  CsvTable table = read_csv_table(path, has_header);
  const std::size_t width = table.rows[0].size();

  std::optional<std::size_t> label_idx;
  if (label_column) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (table.header[c] == *label_column) {
        label_idx = c;
        break;
      }
    }
    if (!label_idx) {
      std::size_t idx = 0;
      const auto* b = label_column->data();
      const auto* e = b + label_column->size();
      auto [ptr, ec] = std::from_chars(b, e, idx);
      if (ec != std::errc() || ptr != e || idx >= width) {
        throw InvalidArgument(path + ": label column '" + *label_column + "' not found");
      }
      label_idx = idx;
    }
  }

  Dataset ds;
  const std::size_t d = width - (label_idx ? 1 : 0);
  if (d == 0) throw DataError(path + ": no feature columns");
  ds.x.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < width; ++c) {
    if (label_idx && c == *label_idx) {
      if (!table.header.empty()) ds.label_name = table.header[c];
      continue;
    }
    ds.feature_names.push_back(table.header.empty() ? "f" + std::to_string(ds.feature_names.size()) : table.header[c]);
  }

  std::unordered_map<std::string, int> codes;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::size_t col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      const std::string cell = trim(table.rows[r][c]);
      if (label_idx && c == *label_idx) {
        auto [it, inserted] = codes.emplace(cell, static_cast<int>(ds.class_names.size()));
        if (inserted) ds.class_names.push_back(cell);
        ds.labels.push_back(it->second);
        continue;
      }
      double value = 0.0;
      const char* b = cell.data();
      const char* e = b + cell.size();
      if (!cell.empty() && *b == '+') ++b;
      auto [ptr, ec] = std::from_chars(b, e, value);
      const std::size_t line = r + 1 + (has_header ? 1 : 0);
      if (cell.empty() || ec != std::errc() || ptr != e) {
        throw DataError(path + ": cannot parse '" + cell + "' as a number at line " + std::to_string(line) +
                        ", column " + std::to_string(c + 1));
      }
      if (!std::isfinite(value)) {
        throw DataError(path + ": non-finite value '" + cell + "' at line " + std::to_string(line) + ", column " +
                        std::to_string(c + 1));
      }
      ds.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col++)) = value;
    }
  }
  return ds;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (std::size_t c = 0; c < ds.n_features(); ++c) {
    if (c > 0) out << ',';
    out << quote_if_needed(ds.feature_names[c]);
  }
  if (ds.has_labels()) out << ',' << quote_if_needed(ds.label_name);
  out << '\n';
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    for (std::size_t c = 0; c < ds.n_features(); ++c) {
      if (c > 0) out << ',';
      out << format_double(ds.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    }
    if (ds.has_labels()) out << ',' << quote_if_needed(ds.class_names[static_cast<std::size_t>(ds.labels[r])]);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace otfs
