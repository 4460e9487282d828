#ifndef CWP_IO_H_
#define CWP_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace cwp::io {

// Whole-file read. A missing or unreadable file is a UsageError: every input
// path comes from the run configuration.
std::string read_file(const std::filesystem::path& path);

// Writes bytes exactly, creating parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cwp::io

#endif  // CWP_IO_H_
