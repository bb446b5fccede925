#include "mgpredict/csv.h"

#include <charconv>
#include <stdexcept>

namespace mgpredict::csv {

std::string number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto& h : header) {
        field(h);
    }
    end_row();
}

Writer& Writer::field(std::string_view text) {
    if (!first_in_row_) {
        out_ << ',';
    }
    out_ << text;
    first_in_row_ = false;
    return *this;
}

Writer& Writer::field(double value) { return field(std::string_view(number(value))); }

Writer& Writer::field(long long value) { return field(std::string_view(std::to_string(value))); }

Writer& Writer::field(unsigned long long value) { return field(std::string_view(std::to_string(value))); }

void Writer::end_row() {
    out_ << '\n';
    first_in_row_ = true;
}

void Writer::close() {
    out_.close();
    if (out_.fail()) {
        throw std::runtime_error("failed writing " + path_.string());
    }
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw std::out_of_range("no column '" + std::string(name) + "'");
}

double Table::number_at(std::size_t row, std::size_t col) const {
    const std::string& text = rows.at(row).at(col);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    return value;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            return out;
        }
        start = comma + 1;
    }
}

}  // namespace

Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (first) {
            t.header = split(line);
            first = false;
        } else {
            t.rows.push_back(split(line));
        }
    }
    return t;
}

}  // namespace mgpredict::csv
