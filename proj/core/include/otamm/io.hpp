#pragma once

#include <string>

#include "otamm/macromodel.hpp"

namespace otamm {

// Strict reader for the model JSON schema. Throws ParseError with key context.
OtaMacromodel parse_model_json(const std::string& text);
OtaMacromodel load_model_file(const std::string& path);
std::string model_to_json(const OtaMacromodel& m, int indent = 2);

}  // namespace otamm
