#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace designrisk {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or -1.
    int column(const std::string& name) const;
};

// Reads a comma-separated file with a required header line. Blank lines are
// skipped; quoting is not supported.
CsvTable read_csv(const std::filesystem::path& path);

// Parses a finite double, throwing with row/column context on failure.
double parse_cell(const std::string& cell, std::size_t row, const std::string& column);

// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace designrisk
