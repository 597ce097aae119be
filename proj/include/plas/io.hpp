#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace plas {

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double value);

// Creates `dir` if needed and checks that a file can be created inside it.
// Throws IoError otherwise.
void ensure_writable_directory(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace plas
