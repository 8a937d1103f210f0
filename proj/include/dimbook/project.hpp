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

// Loading a model file together with the tables it names.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimbook/model.hpp"
#include "dimbook/parser.hpp"

namespace dimbook {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Whole file as bytes. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Parses `path` and binds the tables it lists, resolved against the
/// model file's directory. Data is not loaded when parsing fails. Throws
/// IoError for unreadable files.
ParseResult load_model_file(const std::filesystem::path& path);

}  // namespace dimbook
