/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

#include "qpa/model.hpp"

namespace qpa {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

/// Parses a whole specification document. See the grammar reference in the
/// README. Every identifier ends up bound exactly once; recursion groups
/// are validated to be guarded and linear.
Model parse_spec(const std::string& text);

/// Renders a model back to specification syntax; parse_spec(format_model(m))
/// yields a structurally equal model.
std::string format_model(const Model& m);

}  // namespace qpa
