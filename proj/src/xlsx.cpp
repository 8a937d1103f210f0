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

#include "dimbook/xlsx.hpp"

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "dimbook/keygen.hpp"

namespace dimbook {

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

// --- ZIP container -------------------------------------------------------

constexpr std::uint16_t kDosDate1980 = (0 << 9) | (1 << 5) | 1;

void put16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>(v >> 8);
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint16_t get16(std::string_view s, std::size_t at) {
  if (at + 2 > s.size()) throw XlsxError("truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) |
                                    (static_cast<unsigned char>(s[at + 1]) << 8));
}

std::uint32_t get32(std::string_view s, std::size_t at) {
  return static_cast<std::uint32_t>(get16(s, at)) |
         (static_cast<std::uint32_t>(get16(s, at + 2)) << 16);
}

std::string deflate_raw(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw XlsxError("deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw XlsxError("deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::string inflate_raw(std::string_view data, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw XlsxError("inflateInit2 failed");
  std::string out(expected, '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw XlsxError("corrupt deflate stream");
  return out;
}

class ZipWriter {
 public:
  void add(const std::string& name, std::string_view data) {
    const std::string packed = deflate_raw(data);
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
    Entry e{name, crc, static_cast<std::uint32_t>(packed.size()),
            static_cast<std::uint32_t>(data.size()), static_cast<std::uint32_t>(out_.size())};
    put32(out_, 0x04034b50);
    put16(out_, 20);
    put16(out_, 0);
    put16(out_, 8);
    put16(out_, 0);
    put16(out_, kDosDate1980);
    put32(out_, e.crc);
    put32(out_, e.compressed);
    put32(out_, e.size);
    put16(out_, static_cast<std::uint16_t>(name.size()));
    put16(out_, 0);
    out_ += name;
    out_ += packed;
    entries_.push_back(std::move(e));
  }

  std::string finish() {
    const auto cd_start = static_cast<std::uint32_t>(out_.size());
    for (const auto& e : entries_) {
      put32(out_, 0x02014b50);
      put16(out_, 20);
      put16(out_, 20);
      put16(out_, 0);
      put16(out_, 8);
      put16(out_, 0);
      put16(out_, kDosDate1980);
      put32(out_, e.crc);
      put32(out_, e.compressed);
      put32(out_, e.size);
      put16(out_, static_cast<std::uint16_t>(e.name.size()));
      put16(out_, 0);
      put16(out_, 0);
      put16(out_, 0);
      put16(out_, 0);
      put32(out_, 0);
      put32(out_, e.offset);
      out_ += e.name;
    }
    const auto cd_size = static_cast<std::uint32_t>(out_.size()) - cd_start;
    put32(out_, 0x06054b50);
    put16(out_, 0);
    put16(out_, 0);
    put16(out_, static_cast<std::uint16_t>(entries_.size()));
    put16(out_, static_cast<std::uint16_t>(entries_.size()));
    put32(out_, cd_size);
    put32(out_, cd_start);
    put16(out_, 0);
    return std::move(out_);
  }

 private:
  struct Entry {
    std::string name;
    std::uint32_t crc, compressed, size, offset;
  };
  std::string out_;
  std::vector<Entry> entries_;
};

// --- SpreadsheetML parts -------------------------------------------------

constexpr const char* kXmlHeader =
    "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
constexpr const char* kMainNs = "http://schemas.openxmlformats.org/spreadsheetml/2006/main";
constexpr const char* kRelNs =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships";

// Style indices in styles.xml.
int style_index(const std::optional<NumberFormat>& f) {
  if (!f) return 0;
  switch (*f) {
    case NumberFormat::General: return 0;
    case NumberFormat::Decimal2: return 1;
    case NumberFormat::Currency: return 2;
    case NumberFormat::Percent: return 3;
  }
  return 0;
}

std::string styles_xml() {
  std::ostringstream os;
  os << kXmlHeader << "<styleSheet xmlns=\"" << kMainNs << "\">"
     << "<numFmts count=\"1\"><numFmt numFmtId=\"164\" formatCode=\"&quot;$&quot;#,##0.00\"/>"
     << "</numFmts>"
     << "<fonts count=\"1\"><font><sz val=\"11\"/><name val=\"Calibri\"/></font></fonts>"
     << "<fills count=\"2\"><fill><patternFill patternType=\"none\"/></fill>"
     << "<fill><patternFill patternType=\"gray125\"/></fill></fills>"
     << "<borders count=\"1\"><border><left/><right/><top/><bottom/><diagonal/></border>"
     << "</borders>"
     << "<cellStyleXfs count=\"1\"><xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\"/>"
     << "</cellStyleXfs>"
     << "<cellXfs count=\"4\">"
     << "<xf numFmtId=\"0\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\"/>"
     << "<xf numFmtId=\"2\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\" "
        "applyNumberFormat=\"1\"/>"
     << "<xf numFmtId=\"164\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\" "
        "applyNumberFormat=\"1\"/>"
     << "<xf numFmtId=\"9\" fontId=\"0\" fillId=\"0\" borderId=\"0\" xfId=\"0\" "
        "applyNumberFormat=\"1\"/>"
     << "</cellXfs>"
     << "<cellStyles count=\"1\"><cellStyle name=\"Normal\" xfId=\"0\" builtinId=\"0\"/>"
     << "</cellStyles></styleSheet>";
  return os.str();
}

void write_cell(std::ostringstream& os, const Sheet& sheet, CellAddr addr, const Cell& cell,
                const WorkbookValues* cached) {
  os << "<c r=\"" << a1(addr) << "\"";
  const int style = style_index(cell.format);
  if (style) os << " s=\"" << style << "\"";
  if (const auto* d = std::get_if<double>(&cell.content)) {
    os << "><v>" << format_number(*d) << "</v></c>";
    return;
  }
  if (const auto* s = std::get_if<std::string>(&cell.content)) {
    os << " t=\"inlineStr\"><is><t xml:space=\"preserve\">" << xml_escape(*s)
       << "</t></is></c>";
    return;
  }
  const std::string& text = *cell.formula();
  const std::string body = xml_escape(std::string_view(text).substr(1));
  if (!cached) {
    os << "><f>" << body << "</f></c>";
    return;
  }
  const CellValue v = cached->at(sheet.name(), addr);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          os << "><f>" << body << "</f><v>" << format_number(x) << "</v></c>";
        } else if constexpr (std::is_same_v<T, std::string>) {
          os << " t=\"str\"><f>" << body << "</f><v>" << xml_escape(x) << "</v></c>";
        } else if constexpr (std::is_same_v<T, bool>) {
          os << " t=\"b\"><f>" << body << "</f><v>" << (x ? 1 : 0) << "</v></c>";
        } else if constexpr (std::is_same_v<T, ErrorValue>) {
          if (x == kCycle) {
            os << "><f>" << body << "</f></c>";
          } else {
            os << " t=\"e\"><f>" << body << "</f><v>" << xml_escape(x.code) << "</v></c>";
          }
        } else {
          os << "><f>" << body << "</f></c>";
        }
      },
      v);
}

std::string sheet_xml(const Sheet& sheet, const WorkbookValues* cached) {
  std::ostringstream os;
  os << kXmlHeader << "<worksheet xmlns=\"" << kMainNs << "\" xmlns:r=\"" << kRelNs << "\">";
  os << "<cols><col min=\"1\" max=\"1\" width=\"36\" customWidth=\"1\"/>"
     << "<col min=\"2\" max=\"2\" width=\"18\" customWidth=\"1\"/></cols>";
  os << "<sheetData>";
  std::size_t open_row = 0;
  for (const auto& [addr, cell] : sheet.cells()) {
    if (addr.row != open_row) {
      if (open_row) os << "</row>";
      os << "<row r=\"" << addr.row << "\">";
      open_row = addr.row;
    }
    write_cell(os, sheet, addr, cell, cached);
  }
  if (open_row) os << "</row>";
  os << "</sheetData></worksheet>";
  return os.str();
}

std::string workbook_xml(const Workbook& wb) {
  std::ostringstream os;
  os << kXmlHeader << "<workbook xmlns=\"" << kMainNs << "\" xmlns:r=\"" << kRelNs << "\">"
     << "<sheets>";
  for (std::size_t i = 0; i < wb.sheets.size(); ++i) {
    os << "<sheet name=\"" << xml_escape(wb.sheets[i].name()) << "\" sheetId=\"" << i + 1
       << "\" r:id=\"rId" << i + 1 << "\"/>";
  }
  os << "</sheets>";
  if (!wb.names.empty()) {
    os << "<definedNames>";
    for (const auto& n : wb.names) {
      os << "<definedName name=\"" << xml_escape(n.name) << "\">"
         << xml_escape(n.reference()) << "</definedName>";
    }
    os << "</definedNames>";
  }
  os << "<calcPr calcId=\"191029\" fullCalcOnLoad=\"1\"/></workbook>";
  return os.str();
}

std::string workbook_rels(const Workbook& wb) {
  std::ostringstream os;
  os << kXmlHeader
     << "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">";
  for (std::size_t i = 0; i < wb.sheets.size(); ++i) {
    os << "<Relationship Id=\"rId" << i + 1 << "\" Type=\"" << kRelNs
       << "/worksheet\" Target=\"worksheets/sheet" << i + 1 << ".xml\"/>";
  }
  os << "<Relationship Id=\"rId" << wb.sheets.size() + 1 << "\" Type=\"" << kRelNs
     << "/styles\" Target=\"styles.xml\"/></Relationships>";
  return os.str();
}

std::string content_types(const Workbook& wb) {
  std::ostringstream os;
  os << kXmlHeader
     << "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
     << "<Default Extension=\"rels\" "
        "ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>"
     << "<Default Extension=\"xml\" ContentType=\"application/xml\"/>"
     << "<Override PartName=\"/xl/workbook.xml\" ContentType=\"application/"
        "vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml\"/>";
  for (std::size_t i = 0; i < wb.sheets.size(); ++i) {
    os << "<Override PartName=\"/xl/worksheets/sheet" << i + 1
       << ".xml\" ContentType=\"application/"
          "vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml\"/>";
  }
  os << "<Override PartName=\"/xl/styles.xml\" ContentType=\"application/"
        "vnd.openxmlformats-officedocument.spreadsheetml.styles+xml\"/></Types>";
  return os.str();
}

std::string root_rels() {
  return std::string(kXmlHeader) +
         "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
         "<Relationship Id=\"rId1\" Type=\"" +
         kRelNs + "/officeDocument\" Target=\"xl/workbook.xml\"/></Relationships>";
}

}  // namespace

std::string xlsx_bytes(const Workbook& wb, const WorkbookValues* cached) {
  ZipWriter zip;
  zip.add("[Content_Types].xml", content_types(wb));
  zip.add("_rels/.rels", root_rels());
  zip.add("xl/workbook.xml", workbook_xml(wb));
  zip.add("xl/_rels/workbook.xml.rels", workbook_rels(wb));
  zip.add("xl/styles.xml", styles_xml());
  for (std::size_t i = 0; i < wb.sheets.size(); ++i) {
    zip.add("xl/worksheets/sheet" + std::to_string(i + 1) + ".xml",
            sheet_xml(wb.sheets[i], cached));
  }
  return zip.finish();
}

void write_xlsx(const std::string& path, const Workbook& wb, const WorkbookValues* cached) {
  const std::string bytes = xlsx_bytes(wb, cached);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw XlsxError("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw XlsxError("failed writing '" + path + "'");
}

std::map<std::string, std::string> read_zip(std::string_view bytes) {
  if (bytes.size() < 22) throw XlsxError("not a zip archive");
  std::size_t eocd = bytes.size() - 22;
  while (get32(bytes, eocd) != 0x06054b50) {
    if (eocd == 0) throw XlsxError("zip end record not found");
    --eocd;
  }
  const std::size_t count = get16(bytes, eocd + 10);
  std::size_t at = get32(bytes, eocd + 16);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (get32(bytes, at) != 0x02014b50) throw XlsxError("bad central directory entry");
    const std::uint16_t method = get16(bytes, at + 10);
    const std::uint32_t crc = get32(bytes, at + 16);
    const std::uint32_t csize = get32(bytes, at + 20);
    const std::uint32_t usize = get32(bytes, at + 24);
    const std::uint16_t name_len = get16(bytes, at + 28);
    const std::uint16_t extra_len = get16(bytes, at + 30);
    const std::uint16_t comment_len = get16(bytes, at + 32);
    const std::uint32_t local = get32(bytes, at + 42);
    if (at + 46 + name_len > bytes.size()) throw XlsxError("truncated zip archive");
    std::string name(bytes.substr(at + 46, name_len));
    at += 46 + name_len + extra_len + comment_len;

    if (get32(bytes, local) != 0x04034b50) throw XlsxError("bad local header for " + name);
    const std::size_t data = local + 30 + get16(bytes, local + 26) + get16(bytes, local + 28);
    if (data + csize > bytes.size()) throw XlsxError("truncated entry " + name);
    const std::string_view packed = bytes.substr(data, csize);
    std::string content;
    if (method == 0) content = std::string(packed);
    else if (method == 8) content = inflate_raw(packed, usize);
    else throw XlsxError("unsupported compression method for " + name);
    const auto actual = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
              static_cast<uInt>(content.size())));
    if (actual != crc) throw XlsxError("crc mismatch for " + name);
    out.emplace(std::move(name), std::move(content));
  }
  return out;
}

}  // namespace dimbook
