#include "railco2/csv.hpp"

#include "railco2/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace railco2::csv {

namespace {

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Splits one logical record. Quoted fields may contain commas, doubled quotes
// and newlines; `pos` advances past the record terminator.
std::vector<std::string> split_record(std::string_view text, std::size_t &pos, std::size_t &line,
                                      const std::string &source) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    const std::size_t start_line = line;
    while (pos < text.size()) {
        char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                    continue;
                }
                quoted = false;
                ++pos;
                continue;
            }
            if (c == '\n') ++line;
            field.push_back(c);
            ++pos;
            continue;
        }
        if (c == '"' && trim(field).empty()) {
            field.clear();
            quoted = true;
            field_was_quoted = true;
            ++pos;
            continue;
        }
        if (c == ',') {
            fields.push_back(field_was_quoted ? field : trim(field));
            field.clear();
            field_was_quoted = false;
            ++pos;
            continue;
        }
        if (c == '\n') {
            ++pos;
            ++line;
            fields.push_back(field_was_quoted ? field : trim(field));
            return fields;
        }
        if (field_was_quoted) {
            if (c != ' ' && c != '\t' && c != '\r') {
                throw Error(ErrorCode::MalformedRow,
                            fmt::format("{}:{}: text after closing quote", source, line));
            }
            ++pos;
            continue;
        }
        field.push_back(c);
        ++pos;
    }
    if (quoted) {
        throw Error(ErrorCode::MalformedRow,
                    fmt::format("{}:{}: unterminated quoted field", source, start_line));
    }
    fields.push_back(field_was_quoted ? field : trim(field));
    ++line;
    return fields;
}

bool is_blank_line(std::string_view text, std::size_t pos) {
    while (pos < text.size() && text[pos] != '\n') {
        if (!std::isspace(static_cast<unsigned char>(text[pos]))) return false;
        ++pos;
    }
    return true;
}

} // namespace

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
}

std::size_t Table::column(std::string_view name) const {
    if (auto idx = find_column(name)) return *idx;
    throw Error(ErrorCode::MalformedRow,
                fmt::format("{}:1: missing required column '{}'", source, name));
}

Table parse(std::string_view text, std::string source) {
    Table table;
    table.source = std::move(source);
    // Tolerate a UTF-8 byte order mark.
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::size_t pos = 0;
    std::size_t line = 1;
    bool have_header = false;
    while (pos < text.size()) {
        if (is_blank_line(text, pos)) {
            auto nl = text.find('\n', pos);
            pos = nl == std::string_view::npos ? text.size() : nl + 1;
            ++line;
            continue;
        }
        if (!have_header && text[pos] == '#') {
            auto nl = text.find('\n', pos);
            auto end = nl == std::string_view::npos ? text.size() : nl;
            table.comments.push_back(trim(text.substr(pos + 1, end - pos - 1)));
            pos = nl == std::string_view::npos ? text.size() : nl + 1;
            ++line;
            continue;
        }
        const std::size_t record_line = line;
        auto fields = split_record(text, pos, line, table.source);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        ++table.lines_read;
        if (fields.size() != table.header.size()) {
            throw Error(ErrorCode::MalformedRow,
                        fmt::format("{}:{}: expected {} fields, found {}", table.source,
                                    record_line, table.header.size(), fields.size()));
        }
        table.rows.push_back(Row{record_line, std::move(fields)});
    }
    return table;
}

Table read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.filename().string());
}

const std::string &RowReader::text(std::size_t col) const { return row_.fields.at(col); }

std::string RowReader::trimmed(std::size_t col) const { return trim(row_.fields.at(col)); }

bool RowReader::blank(std::size_t col) const { return trimmed(col).empty(); }

void RowReader::fail(const std::string &reason) const {
    throw Error(ErrorCode::MalformedRow,
                fmt::format("{}:{}: {}", table_.source, row_.line, reason));
}

long long RowReader::integer(std::size_t col) const {
    auto s = trimmed(col);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        fail(fmt::format("column '{}': expected integer, got \"{}\"", table_.header[col], s));
    }
    return value;
}

std::optional<long long> RowReader::optional_integer(std::size_t col) const {
    if (blank(col)) return std::nullopt;
    return integer(col);
}

double RowReader::real(std::size_t col) const {
    auto s = trimmed(col);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        fail(fmt::format("column '{}': expected number, got \"{}\"", table_.header[col], s));
    }
    return value;
}

std::optional<double> RowReader::optional_real(std::size_t col) const {
    if (blank(col)) return std::nullopt;
    return real(col);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos &&
        (field.empty() || (field.front() != ' ' && field.back() != ' '))) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string> &fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

std::string format_real(double value) { return fmt::format("{}", value); }

} // namespace railco2::csv
