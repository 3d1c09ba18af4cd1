#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "shapegam/error.hpp"

namespace shapegam::cli {

namespace {

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits one record, honouring double-quoted fields. Reads more lines from
// `in` while a quoted field spans a line break.
std::vector<std::string> split_record(std::string line, std::istream& in, std::size_t& line_no) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (quoted) {
        std::string more;
        if (!read_line(in, more)) {
          throw InvalidInput("unterminated quoted field at line " + std::to_string(line_no));
        }
        ++line_no;
        cell += '\n';
        line = more;
        i = static_cast<std::size_t>(-1);
        continue;
      }
      break;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? cell : trim(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell += c;
    }
  }
  out.push_back(was_quoted ? cell : trim(cell));
  return out;
}

}  // namespace

std::optional<double> parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* b = t.data();
  const char* e = b + t.size();
  if (*b == '+') ++b;
  double v = 0.0;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

DataFrame DataFrame::read(std::istream& in) {
  DataFrame df;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    std::vector<std::string> rec = split_record(line, in, line_no);
    if (df.names_.empty()) {
      df.names_ = std::move(rec);
      for (std::size_t i = 0; i < df.names_.size(); ++i) {
        if (df.names_[i].empty()) {
          throw InvalidInput("header column " + std::to_string(i + 1) + " has no name");
        }
        for (std::size_t j = 0; j < i; ++j) {
          if (df.names_[j] == df.names_[i]) {
            throw InvalidInput("duplicate column name '" + df.names_[i] + "'");
          }
        }
      }
      continue;
    }
    if (rec.size() != df.names_.size()) {
      throw InvalidInput("line " + std::to_string(line_no) + " has " + std::to_string(rec.size()) +
                         " fields, expected " + std::to_string(df.names_.size()));
    }
    df.rows_.push_back(std::move(rec));
  }
  if (df.names_.empty()) throw InvalidInput("CSV input has no header row");
  return df;
}

DataFrame DataFrame::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open data file '" + path + "'");
  return read(in);
}

bool DataFrame::has(const std::string& name) const {
  for (const auto& n : names_) {
    if (n == name) return true;
  }
  return false;
}

std::size_t DataFrame::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw InvalidInput("column '" + name + "' not found in the data");
}

std::vector<std::string> DataFrame::text_column(const std::string& name) const {
  const std::size_t c = index_of(name);
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r][c].empty() || rows_[r][c] == "NA") {
      throw InvalidInput("missing value in column '" + name + "' at data row " +
                         std::to_string(r + 1));
    }
    out.push_back(rows_[r][c]);
  }
  return out;
}

std::vector<double> DataFrame::numeric_column(const std::string& name) const {
  const std::size_t c = index_of(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::string& cell = rows_[r][c];
    const auto v = parse_number(cell);
    if (!v) {
      const bool missing = cell.empty() || cell == "NA" || cell == "NaN";
      throw InvalidInput(std::string(missing ? "missing" : "non-numeric") + " value '" + cell +
                         "' in column '" + name + "' at data row " + std::to_string(r + 1));
    }
    out.push_back(*v);
  }
  return out;
}

}  // namespace shapegam::cli
