#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "petroscope/image.hpp"

namespace testutil {

inline petroscope::RgbImage noise_rgb(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255) {
    std::mt19937_64 rng(seed);
    petroscope::RgbImage img(w, h);
    const int span = hi - lo + 1;
    for (auto& p : img.data) {
        p.r = static_cast<std::uint8_t>(lo + static_cast<int>(rng() % span));
        p.g = static_cast<std::uint8_t>(lo + static_cast<int>(rng() % span));
        p.b = static_cast<std::uint8_t>(lo + static_cast<int>(rng() % span));
    }
    return img;
}

inline petroscope::GrayImage noise_gray(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255) {
    std::mt19937_64 rng(seed);
    petroscope::GrayImage img(w, h);
    const int span = hi - lo + 1;
    for (auto& v : img.data) {
        v = static_cast<std::uint8_t>(lo + static_cast<int>(rng() % span));
    }
    return img;
}

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("petroscope_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
