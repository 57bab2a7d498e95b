#include "lded/csv.hpp"

#include <fstream>

#include "lded/common.hpp"

namespace lded::csv {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError("header", 0, "missing column '" + name + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

Table read(const std::filesystem::path& path, const std::string& stream) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError(stream, 0, "empty file, header expected");
    t.header = split(line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split(line);
        if (fields.size() != t.header.size()) {
            throw DataError(stream, row, "expected " + std::to_string(t.header.size()) +
                                             " fields, got " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        ++row;
    }
    return t;
}

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    auto put = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    put(header);
    for (const auto& r : rows) put(r);
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lded::csv
