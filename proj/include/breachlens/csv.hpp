#ifndef BREACHLENS_CSV_HPP
#define BREACHLENS_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

#include "breachlens/core.hpp"

namespace breachlens::csv {

// RFC 4180 reader: quoted fields may contain commas, escaped quotes ("") and
// embedded line breaks. Rows are vectors of cells; a header row is the
// caller's business.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::vector<std::string>> parse_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  std::size_t line = 1;

  auto end_cell = [&]() {
    row.push_back(cell);
    cell.clear();
    cell_started = false;
  };
  auto end_row = [&]() {
    end_cell();
    rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (cell.empty() && !cell_started) {
          in_quotes = true;
          cell_started = true;
        } else {
          throw parse_error("stray quote inside unquoted cell at line " +
                                std::to_string(line),
                            line);
        }
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;  // swallow, LF ends row
        end_row();
        ++line;
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        cell.push_back(c);
        cell_started = true;
        break;
    }
  }
  if (in_quotes) throw parse_error("unterminated quoted cell at end of input", line);
  if (cell_started || !cell.empty() || !row.empty()) end_row();
  return rows;
}

inline Table parse_with_header(std::string_view text) {
  Table t;
  auto rows = parse_rows(text);
  if (rows.empty()) throw parse_error("CSV input has no header row");
  t.header = std::move(rows.front());
  t.rows.assign(std::make_move_iterator(rows.begin() + 1),
                std::make_move_iterator(rows.end()));
  return t;
}

inline std::string escape_cell(std::string_view cell) {
  bool needs_quotes = cell.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string write_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_cell(cells[i]);
  }
  out += "\r\n";
  return out;
}

}  // namespace breachlens::csv

#endif  // BREACHLENS_CSV_HPP
