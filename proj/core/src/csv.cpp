#include "alime/csv.hpp"

#include <fstream>

#include <fmt/format.h>

#include "alime/error.hpp"

namespace alime {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> fields) {
    if (fields.size() != header_.size()) throw DimensionError("CSV row width does not match the header");
    rows_.push_back(std::move(fields));
}

std::string CsvWriter::quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string CsvWriter::number(double value) { return fmt::format("{}", value); }

std::string CsvWriter::str() const {
    std::string out;
    const auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += quote(fields[i]);
        }
        out += "\r\n";
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << str();
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace alime
