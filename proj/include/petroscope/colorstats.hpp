#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "petroscope/error.hpp"
#include "petroscope/image.hpp"

namespace petroscope {

// Population statistics: mean, raw sum of squared deviations (no 1/n), and
// the normalized variance sum_sq_dev / n.
struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sum_sq_dev = 0.0;
    double variance = 0.0;
};

// Welford's one-pass update; numerically stable for long streams.
inline SampleStats stats(std::span<const double> values) {
    if (values.empty()) throw EmptySample("stats: no values");
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double x : values) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    return SampleStats{n, mean, m2, m2 / static_cast<double>(n)};
}

// Per-channel value counts over a pixel region.
struct RgbHistogram {
    std::array<std::array<std::uint64_t, 256>, 3> bins{};  // [channel][value]
    std::uint64_t pixel_count = 0;
};

inline void require_region_within(const RgbImage& img, const Rect& region) {
    if (region.w < 1 || region.h < 1 || region.x < 0 || region.y < 0 ||
        region.x + region.w > img.width || region.y + region.h > img.height) {
        throw RegionOutOfBounds("region " + std::to_string(region.x) + "," +
                                std::to_string(region.y) + " " + std::to_string(region.w) + "x" +
                                std::to_string(region.h) + " not inside " +
                                std::to_string(img.width) + "x" + std::to_string(img.height));
    }
}

inline RgbHistogram histogram(const RgbImage& img, const Rect& region) {
    require_region_within(img, region);
    RgbHistogram h;
    for (int y = region.y; y < region.y + region.h; ++y) {
        const Rgb* row = &img.at(region.x, y);
        for (int x = 0; x < region.w; ++x) {
            ++h.bins[0][row[x].r];
            ++h.bins[1][row[x].g];
            ++h.bins[2][row[x].b];
        }
    }
    h.pixel_count = static_cast<std::uint64_t>(region.w) * static_cast<std::uint64_t>(region.h);
    return h;
}

enum class VarianceMode {
    Chroma,           // mean over pixels of each pixel's own 3-channel variance
    PerChannelMax,    // max of the three per-channel population variances
    PerChannelMean,   // mean of the three per-channel population variances
};

inline const char* to_string(VarianceMode m) {
    switch (m) {
        case VarianceMode::Chroma: return "chroma";
        case VarianceMode::PerChannelMax: return "per-channel-max";
        case VarianceMode::PerChannelMean: return "per-channel-mean";
    }
    return "?";
}

struct ColourVarianceScore {
    double value = 0.0;
    VarianceMode mode = VarianceMode::Chroma;
};

namespace colorstats_detail {

// Population variance of one channel from integer moments. The subtraction
// n*S2 - S1^2 is exact in 128-bit integers, so the histogram route and a
// direct pixel loop agree bit for bit.
inline double channel_variance(const std::array<std::uint64_t, 256>& bins, std::uint64_t n) {
    std::uint64_t s1 = 0;
    std::uint64_t s2 = 0;
    for (std::uint32_t v = 0; v < 256; ++v) {
        s1 += bins[v] * v;
        s2 += bins[v] * v * v;
    }
    const unsigned __int128 num =
        static_cast<unsigned __int128>(n) * s2 - static_cast<unsigned __int128>(s1) * s1;
    return static_cast<double>(num) / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace colorstats_detail

// Colour variance of a region under the chosen mode.
//
// Chroma mode averages, over pixels, the population variance of the pixel's
// own (r, g, b) triple. With s = r+g+b that per-pixel variance equals
// ((3r-s)^2 + (3g-s)^2 + (3b-s)^2) / 27, so the sum is accumulated in
// integers and divided once: a region of identical pixels scores exactly the
// triple's variance (e.g. pure red 255,0,0 -> 14450).
inline ColourVarianceScore colour_variance(const RgbImage& img, const Rect& region,
                                           VarianceMode mode = VarianceMode::Chroma) {
    require_region_within(img, region);
    if (mode == VarianceMode::Chroma) {
        unsigned __int128 total = 0;
        for (int y = region.y; y < region.y + region.h; ++y) {
            const Rgb* row = &img.at(region.x, y);
            for (int x = 0; x < region.w; ++x) {
                const std::int64_t r = row[x].r, g = row[x].g, b = row[x].b;
                const std::int64_t s = r + g + b;
                const std::int64_t dr = 3 * r - s;
                const std::int64_t dg = 3 * g - s;
                const std::int64_t db = 3 * b - s;
                total += static_cast<std::uint64_t>(dr * dr + dg * dg + db * db);
            }
        }
        const double n = static_cast<double>(region.area());
        return ColourVarianceScore{static_cast<double>(total) / (27.0 * n), mode};
    }

    const RgbHistogram h = histogram(img, region);
    const double vr = colorstats_detail::channel_variance(h.bins[0], h.pixel_count);
    const double vg = colorstats_detail::channel_variance(h.bins[1], h.pixel_count);
    const double vb = colorstats_detail::channel_variance(h.bins[2], h.pixel_count);
    if (mode == VarianceMode::PerChannelMax) {
        return ColourVarianceScore{std::max(vr, std::max(vg, vb)), mode};
    }
    return ColourVarianceScore{(vr + vg + vb) / 3.0, mode};
}

}  // namespace petroscope
