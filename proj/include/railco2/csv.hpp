#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace railco2::csv {

struct Row {
    std::size_t line = 0; // 1-based physical line in the source file
    std::vector<std::string> fields;
};

// Parsed CSV file. Lines starting with '#' before the header are kept in
// `comments`; blank lines are skipped everywhere.
struct Table {
    std::string source;
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<Row> rows;
    std::size_t lines_read = 0;

    std::optional<std::size_t> find_column(std::string_view name) const;
    std::size_t column(std::string_view name) const;
};

Table parse(std::string_view text, std::string source);
Table read_file(const std::filesystem::path &path);

// Field accessors that raise MalformedRow naming file, line and column.
class RowReader {
public:
    RowReader(const Table &table, const Row &row) : table_(table), row_(row) {}

    const std::string &text(std::size_t col) const;
    std::string trimmed(std::size_t col) const;
    bool blank(std::size_t col) const;
    long long integer(std::size_t col) const;
    std::optional<long long> optional_integer(std::size_t col) const;
    double real(std::size_t col) const;
    std::optional<double> optional_real(std::size_t col) const;

    [[noreturn]] void fail(const std::string &reason) const;

private:
    const Table &table_;
    const Row &row_;
};

std::string escape(std::string_view field);
std::string join(const std::vector<std::string> &fields);
// Shortest representation that round-trips exactly.
std::string format_real(double value);

} // namespace railco2::csv
