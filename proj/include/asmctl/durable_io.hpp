#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

namespace asmctl {

// Appends text and fsyncs the file. A file created by the call also gets
// its directory entry synced. Throws IoError.
void append_durable(const std::filesystem::path& path, const std::string& text);

// Writes a sibling temp file, fsyncs it, renames it over `path` and syncs
// the directory, so readers see either the old or the new content.
// Throws IoError.
void replace_durable(const std::filesystem::path& path, const char* data, std::size_t size);
inline void replace_durable(const std::filesystem::path& path, const std::string& text) {
  replace_durable(path, text.data(), text.size());
}

}  // namespace asmctl
