#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace trajcon::cli {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# schema_version=" << kCsvSchemaVersion << "\n";
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string CsvWriter::num(long long v) { return std::to_string(v); }

}  // namespace trajcon::cli
