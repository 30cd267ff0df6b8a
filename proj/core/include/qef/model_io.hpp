#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qef/model.hpp"

namespace qef {

// Model file schema: {"n": int, "m": int, "Theta": [[...]], "A": [[...]], "B": [[...]],
// optional "C", "R", "M"}, matrices as row-major nested arrays.
// Malformed input, shape mismatches and odd n or m raise kParseError.
OqhoModel parse_model_json(std::string_view text);
OqhoModel load_model(const std::filesystem::path& path);

// Emits the same schema with shortest round-trip number formatting, so that
// parse_model_json(model_to_json(m)) reproduces every entry bit for bit.
std::string model_to_json(const OqhoModel& model, int indent = 2);

// Fixed 12-significant-digit formatting used by every text output.
std::string format_number(double value);

}  // namespace qef
