#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace trajcon::cli {

inline constexpr int kCsvSchemaVersion = 1;

/// CSV file whose first line is "# schema_version=N" followed by the header.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& cells);

    /// 17 significant digits so values round-trip; empty string for NaN.
    static std::string num(double v);
    static std::string num(long long v);

private:
    std::ofstream out_;
    std::size_t columns_;
};

}  // namespace trajcon::cli
