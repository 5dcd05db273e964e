#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlac {

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::uint8_t* data, std::size_t size);
void write_text_file(const std::string& path, const std::string& text);
bool file_exists(const std::string& path);

// Splits one CSV record on commas. No quoting: fields containing commas are
// rejected upstream when the data is produced.
std::vector<std::string> split_csv_line(const std::string& line);

// Splits text into lines, accepting both LF and CRLF, dropping a trailing
// empty line.
std::vector<std::string> split_lines(const std::string& text);

// Formats a double with 9 significant digits (shortest form).
std::string fmt_g9(double v);

// Fixed two decimals, the rendering used by the accuracy tables.
std::string fmt_pct2(double v);

// Joins a directory and a relative path with '/'; absolute rel wins.
std::string path_join(const std::string& dir, const std::string& rel);

// Directory part of a path ("" if none).
std::string path_dir(const std::string& path);

void make_dirs(const std::string& path);

}  // namespace dlac
