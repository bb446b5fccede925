#pragma once

#include "mgpredict/data.h"
#include "mgpredict/engine.h"
#include "mgpredict/random.h"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mgtest {

using mgpredict::Direction;

inline std::vector<Direction> signs_from(const std::string& pattern) {
    std::vector<Direction> out;
    for (char c : pattern) {
        out.push_back(c == 'U' ? Direction::Up : Direction::Down);
    }
    return out;
}

inline std::vector<Direction> random_signs(std::size_t n, std::uint64_t seed) {
    mgpredict::Rng rng(seed);
    std::vector<Direction> out(n);
    for (auto& s : out) {
        s = rng.coin() ? Direction::Up : Direction::Down;
    }
    return out;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mgpredict_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ignored;
        std::filesystem::remove_all(path_, ignored);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace mgtest
