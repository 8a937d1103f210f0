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

#include "dimbook/project.hpp"

#include <fstream>
#include <sstream>

namespace dimbook {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << f.rdbuf();
  if (f.bad()) throw IoError("failed reading '" + path.string() + "'");
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

ParseResult load_model_file(const std::filesystem::path& path) {
  ParseResult parsed = parse_model(read_file(path), path.filename().string());
  if (!parsed.ok()) return parsed;
  std::vector<CsvDocument> docs;
  for (const auto& rel : parsed.model.table_paths) {
    const std::filesystem::path p = path.parent_path() / rel;
    docs.push_back({rel, read_file(p)});
  }
  ParseResult loaded = load_data(std::move(parsed.model), docs);
  loaded.diagnostics.insert(loaded.diagnostics.begin(), parsed.diagnostics.begin(),
                            parsed.diagnostics.end());
  return loaded;
}

}  // namespace dimbook
