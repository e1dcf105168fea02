#pragma once

#include <filesystem>
#include <string>

namespace saldet {

/// Reads a whole file; throws IoError if it cannot be opened or read.
std::string read_text_file(const std::filesystem::path& path);

/// Writes content atomically: a sibling temp file is written, flushed and
/// renamed over the target, so interrupted runs never leave partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace saldet
