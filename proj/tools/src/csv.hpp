#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace shapegam::cli {

/// A CSV table held as text cells. The first row is the header.
class DataFrame {
 public:
  static DataFrame read(std::istream& in);
  static DataFrame read_file(const std::string& path);

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  bool has(const std::string& name) const;

  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
  /// Text cells of a column; throws InvalidInput naming a missing column.
  std::vector<std::string> text_column(const std::string& name) const;
  /// Parses every cell as a finite number; NA, empty and malformed cells
  /// raise InvalidInput with row and column.
  std::vector<double> numeric_column(const std::string& name) const;

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a number in "." decimal notation; nullopt if the text is not one.
std::optional<double> parse_number(const std::string& text);

/// Shortest text that reads back as the same double.
std::string format_number(double v);

}  // namespace shapegam::cli
