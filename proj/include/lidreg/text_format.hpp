#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace lidreg {

/// Parses `name = value` lines. Blank lines and `#` comments are ignored;
/// later duplicates override earlier ones.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lidreg
