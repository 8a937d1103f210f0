// Copyright 2026 The dimbook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dimbook/workbook.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dimbook/keygen.hpp"
#include "dimbook/naming.hpp"

namespace dimbook {

std::string a1(CellAddr addr, bool absolute) {
  const std::string dollar = absolute ? "$" : "";
  return dollar + column_letters(addr.col) + dollar + std::to_string(addr.row);
}

Cell number_cell(double v, std::optional<NumberFormat> fmt) { return Cell{v, fmt}; }
Cell text_cell(std::string s) { return Cell{std::move(s), std::nullopt}; }
Cell formula_cell(std::string text, std::optional<NumberFormat> fmt) {
  if (text.empty() || text.front() != '=') text.insert(text.begin(), '=');
  return Cell{FormulaText{std::move(text)}, fmt};
}

void Sheet::set(CellAddr at, Cell cell) {
  if (at.row == 0 || at.col == 0) throw std::out_of_range("cell address must be 1-based");
  cells_[at] = std::move(cell);
}

const Cell* Sheet::at(CellAddr addr) const {
  auto it = cells_.find(addr);
  return it == cells_.end() ? nullptr : &it->second;
}

Cell* Sheet::at(CellAddr addr) {
  auto it = cells_.find(addr);
  return it == cells_.end() ? nullptr : &it->second;
}

std::size_t Sheet::max_row() const {
  return cells_.empty() ? 0 : cells_.rbegin()->first.row;
}

std::size_t Sheet::row_width(std::size_t row) const {
  auto it = cells_.lower_bound(CellAddr{row + 1, 0});
  if (it == cells_.begin()) return 0;
  --it;
  return it->first.row == row ? it->first.col : 0;
}

std::string quote_sheet_name(std::string_view name) {
  bool plain = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') plain = false;
  }
  if (plain && is_valid_defined_name(name)) return std::string(name);
  std::string out = "'";
  for (char c : name) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

std::string NamedRange::reference() const {
  const std::string prefix = quote_sheet_name(sheet) + "!";
  if (col) return prefix + a1({row, *col}, true);
  return prefix + "$" + std::to_string(row) + ":$" + std::to_string(row);
}

Sheet* Workbook::sheet(std::string_view name) {
  for (auto& s : sheets) {
    if (s.name() == name) return &s;
  }
  return nullptr;
}

const Sheet* Workbook::sheet(std::string_view name) const {
  for (const auto& s : sheets) {
    if (s.name() == name) return &s;
  }
  return nullptr;
}

const NamedRange* Workbook::name(std::string_view n) const {
  for (const auto& r : names) {
    if (r.name == n) return &r;
  }
  return nullptr;
}

std::string format_number(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Formula view

namespace {

bool reads_as_number(std::string_view s) {
  if (s.empty()) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string render_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, FormulaText>) {
          return v.text;
        } else {
          if (v.empty() || v.front() == '=' || v.front() == '\'' || reads_as_number(v)) {
            return "'" + v;
          }
          return v;
        }
      },
      c.content);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

NamedRange parse_reference(std::string name, std::string_view ref, int line) {
  auto fail = [&](const std::string& why) {
    return FormulaViewError("line " + std::to_string(line) + ": " + why);
  };
  auto bang = ref.rfind('!');
  if (bang == std::string_view::npos) throw fail("reference without sheet");
  std::string sheet(ref.substr(0, bang));
  if (sheet.size() >= 2 && sheet.front() == '\'' && sheet.back() == '\'') {
    std::string raw = sheet.substr(1, sheet.size() - 2);
    sheet.clear();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      sheet += raw[i];
      if (raw[i] == '\'' && i + 1 < raw.size() && raw[i + 1] == '\'') ++i;
    }
  }
  std::string_view target = ref.substr(bang + 1);
  NamedRange r{std::move(name), std::move(sheet), 0, std::nullopt};
  auto strip = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c != '$') out += c;
    }
    return out;
  };
  auto colon = target.find(':');
  if (colon != std::string_view::npos) {
    const std::string a = strip(target.substr(0, colon));
    const std::string b = strip(target.substr(colon + 1));
    if (a != b || a.empty() || !std::all_of(a.begin(), a.end(), ::isdigit)) {
      throw fail("only single whole-row names are supported");
    }
    r.row = std::stoul(a);
  } else {
    const std::string s = strip(target);
    std::size_t i = 0;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0 || i == s.size()) throw fail("malformed cell reference");
    r.col = column_index(s.substr(0, i));
    r.row = std::stoul(s.substr(i));
  }
  if (r.row == 0) throw fail("row 0 in reference");
  return r;
}

}  // namespace

std::string render_formula_view(const Workbook& wb) {
  std::ostringstream os;
  for (const auto& sheet : wb.sheets) {
    os << "[sheet " << sheet.name() << "]\n";
    const std::size_t rows = sheet.max_row();
    auto it = sheet.cells().begin();
    for (std::size_t r = 1; r <= rows; ++r) {
      os << r;
      std::size_t col = 0;
      for (; it != sheet.cells().end() && it->first.row == r; ++it) {
        while (col < it->first.col) {
          os << '\t';
          ++col;
        }
        os << render_cell(it->second);
      }
      os << '\n';
    }
    for (const auto& p : wb.provenance) {
      if (p.sheet != sheet.name()) continue;
      os << "# " << p.variable << ": rows " << p.first_row << "-" << p.last_row;
      if (!p.note.empty()) os << " (" << p.note << ")";
      os << '\n';
    }
  }
  os << "[names]\n";
  for (const auto& n : wb.names) os << n.name << '\t' << n.reference() << '\n';
  return os.str();
}

Workbook parse_formula_view(std::string_view text) {
  Workbook wb;
  Sheet* current = nullptr;
  bool in_names = false;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line == "[names]") {
        in_names = true;
        current = nullptr;
      } else if (line.substr(0, 7) == "[sheet " && line.back() == ']') {
        wb.sheets.emplace_back(std::string(line.substr(7, line.size() - 8)));
        current = &wb.sheets.back();
        in_names = false;
      } else {
        throw FormulaViewError("line " + std::to_string(line_no) +
                               ": unknown section " + std::string(line));
      }
      continue;
    }
    if (in_names) {
      auto parts = split(line, '\t');
      if (parts.size() != 2) {
        throw FormulaViewError("line " + std::to_string(line_no) + ": malformed name");
      }
      wb.names.push_back(parse_reference(std::string(parts[0]), parts[1], line_no));
      continue;
    }
    if (!current) {
      throw FormulaViewError("line " + std::to_string(line_no) +
                             ": cell row outside a sheet section");
    }
    auto parts = split(line, '\t');
    std::size_t row = 0;
    auto [ptr, ec] = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), row);
    if (ec != std::errc() || row == 0) {
      throw FormulaViewError("line " + std::to_string(line_no) + ": bad row number");
    }
    for (std::size_t c = 1; c < parts.size(); ++c) {
      std::string_view raw = parts[c];
      if (raw.empty()) continue;
      Cell cell;
      if (raw.front() == '=') {
        cell = formula_cell(std::string(raw));
      } else if (raw.front() == '\'') {
        cell = text_cell(std::string(raw.substr(1)));
      } else if (reads_as_number(raw)) {
        double v = 0;
        std::from_chars(raw.data(), raw.data() + raw.size(), v);
        cell = number_cell(v);
      } else {
        cell = text_cell(std::string(raw));
      }
      current->set({row, c}, std::move(cell));
    }
  }
  return wb;
}

}  // namespace dimbook
