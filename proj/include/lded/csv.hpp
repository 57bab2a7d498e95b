// Minimal comma-separated table I/O. No quoting: every file this project
// writes holds plain numeric or identifier fields.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lded::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws DataError when absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Reads a whole table. Throws IoError if unreadable, DataError on ragged rows.
/// `stream` names the table in error messages.
Table read(const std::filesystem::path& path, const std::string& stream);

std::vector<std::string> split(const std::string& line, char sep = ',');

/// Writes `header` then `rows` joined by commas, '\n' line endings.
void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

}  // namespace lded::csv
