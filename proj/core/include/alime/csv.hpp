#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace alime {

/// RFC 4180 writer: CRLF line endings, fields quoted only when they contain a
/// comma, quote, CR or LF.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(std::vector<std::string> fields);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

    static std::string quote(const std::string& field);
    /// Shortest round-trip decimal representation.
    static std::string number(double value);

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace alime
