#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "normy/corpus_index.hpp"

namespace testing {

inline std::string fixture(const std::string& name) {
    std::ifstream in(std::string(NORMY_FIXTURES) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Hand-rolled generator helpers over a seeded engine.
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
    std::size_t between(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    bool chance(double p) { return real(0, 1) < p; }

    // Zipf-ish draw from "w0".."w{n-1}" so frequent and rare terms both appear.
    std::string word(std::size_t vocab) {
        const double u = real(0, 1);
        const auto idx = static_cast<std::size_t>(static_cast<double>(vocab) * u * u * u);
        return "w" + std::to_string(idx < vocab ? idx : vocab - 1);
    }

    std::string sentence(std::size_t vocab, std::size_t lo, std::size_t hi) {
        std::string s;
        const auto n = between(lo, hi);
        for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + word(vocab);
        return s;
    }

    std::vector<double> reals(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = real(lo, hi);
        return v;
    }
};

// A temporary directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("normy-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream(path, std::ios::binary) << data;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<normy::Passage> passages(const std::vector<std::pair<std::string, std::string>>& docs) {
    std::vector<normy::Passage> out;
    for (const auto& [id, text] : docs) out.push_back(normy::Passage::make(id, "", text));
    return out;
}

}  // namespace testing
