#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace difftrack {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path);
    return in;
}

// Writes via a temp file in the same directory, then renames, so partial
// artifacts are never observed.
void write_file_atomic(const std::string& path, const std::string& content);

std::vector<std::string> split_csv_line(const std::string& line);

std::string format_double(double v);

}  // namespace difftrack
