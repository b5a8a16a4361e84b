#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace syklab {

// 17 significant digits; round-trips through parse_double exactly.
std::string format_double(double x);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Whole-file helpers; failures raise IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

} // namespace syklab
