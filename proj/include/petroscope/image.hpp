#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "petroscope/error.hpp"

namespace petroscope {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

static_assert(sizeof(Rgb) == 3, "Rgb must stay a packed byte triple");

// 24-bit colour raster, row-major, origin at the top-left corner.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> data;

    RgbImage() = default;
    RgbImage(int w, int h, Rgb fill = {})
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    Rgb& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// 8-bit luminance raster with the same layout as RgbImage.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct ImageMeta {
    std::string source_path;
    int original_width = 0;
    int original_height = 0;
    std::optional<int> dpi;
};

// Axis-aligned pixel rectangle: origin (x, y), extent w by h.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

// Half-up rounding: exact .5 goes toward +infinity.
inline int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

// Box-filter downscale restricted to exact integral factors per axis.
// Each output pixel is the per-channel mean of its source block, rounded
// half-up; the division is done in integers so results carry no float error.
inline RgbImage resize_box(const RgbImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1 || img.width < 1 || img.height < 1 ||
        out_w > img.width || out_h > img.height ||
        img.width % out_w != 0 || img.height % out_h != 0) {
        throw NonIntegralFactor("resize_box: " + std::to_string(img.width) + "x" +
                                std::to_string(img.height) + " -> " + std::to_string(out_w) + "x" +
                                std::to_string(out_h) + " is not an exact integral downscale");
    }
    const int fx = img.width / out_w;
    const int fy = img.height / out_h;
    const std::uint64_t block = static_cast<std::uint64_t>(fx) * fy;
    RgbImage out(out_w, out_h);
    for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
            std::uint64_t sr = 0, sg = 0, sb = 0;
            for (int dy = 0; dy < fy; ++dy) {
                const Rgb* row = &img.at(ox * fx, oy * fy + dy);
                for (int dx = 0; dx < fx; ++dx) {
                    sr += row[dx].r;
                    sg += row[dx].g;
                    sb += row[dx].b;
                }
            }
            // floor(s / block + 1/2) == (2 s + block) / (2 block) in integers.
            out.at(ox, oy) = Rgb{
                static_cast<std::uint8_t>((2 * sr + block) / (2 * block)),
                static_cast<std::uint8_t>((2 * sg + block) / (2 * block)),
                static_cast<std::uint8_t>((2 * sb + block) / (2 * block)),
            };
        }
    }
    return out;
}

// Rec.601 luma with half-up rounding.
inline GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const Rgb p = img.data[i];
        const double luma = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
        const int v = round_half_up(luma);
        out.data[i] = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
    }
    return out;
}

// Analysis happens at 512x384. Larger sources that are an exact integral
// multiple of that on both axes are box-downscaled; anything else is kept
// at native resolution (the caller may warn).
inline constexpr int kWorkingWidth = 512;
inline constexpr int kWorkingHeight = 384;

inline RgbImage to_working_resolution(RgbImage img) {
    if (img.width > kWorkingWidth && img.height > kWorkingHeight &&
        img.width % kWorkingWidth == 0 && img.height % kWorkingHeight == 0 &&
        img.width / kWorkingWidth == img.height / kWorkingHeight) {
        return resize_box(img, kWorkingWidth, kWorkingHeight);
    }
    return img;
}

}  // namespace petroscope
