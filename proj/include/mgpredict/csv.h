#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace mgpredict::csv {

/// Shortest text that round-trips the double exactly.
std::string number(double value);

/// Header-plus-rows writer. Fields are written verbatim; callers keep
/// commas out of them.
class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

    Writer& field(std::string_view text);
    Writer& field(double value);
    Writer& field(long long value);
    Writer& field(unsigned long long value);
    Writer& field(int value) { return field(static_cast<long long>(value)); }
    Writer& field(unsigned value) { return field(static_cast<unsigned long long>(value)); }
    Writer& field(unsigned long value) { return field(static_cast<unsigned long long>(value)); }
    Writer& field(long value) { return field(static_cast<long long>(value)); }
    void end_row();
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool first_in_row_ = true;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws std::out_of_range when absent.
    std::size_t column(std::string_view name) const;
    double number_at(std::size_t row, std::size_t col) const;
};

Table read(const std::filesystem::path& path);

}  // namespace mgpredict::csv
