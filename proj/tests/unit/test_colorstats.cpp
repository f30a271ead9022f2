#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "petroscope/colorstats.hpp"

using namespace petroscope;

namespace {

// Two-pass long double reference for mean / sum of squared deviations.
SampleStats stats_oracle(const std::vector<double>& v) {
    long double sum = 0.0L;
    for (double x : v) sum += x;
    const long double mean = sum / static_cast<long double>(v.size());
    long double ssd = 0.0L;
    for (double x : v) ssd += (x - mean) * (x - mean);
    return SampleStats{v.size(), static_cast<double>(mean), static_cast<double>(ssd),
                       static_cast<double>(ssd / static_cast<long double>(v.size()))};
}

double rel_diff(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
    return std::fabs(a - b) / scale;
}

// Direct per-pixel evaluation of the chroma score in floating point.
double chroma_oracle(const RgbImage& img, const Rect& r) {
    long double total = 0.0L;
    for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) {
            const Rgb p = img.at(x, y);
            const long double m = (static_cast<long double>(p.r) + p.g + p.b) / 3.0L;
            total += ((p.r - m) * (p.r - m) + (p.g - m) * (p.g - m) + (p.b - m) * (p.b - m)) / 3.0L;
        }
    }
    return static_cast<double>(total / (static_cast<long double>(r.w) * r.h));
}

// Integer-moment route straight off the pixels, bypassing the histogram.
void channel_variances_oracle(const RgbImage& img, const Rect& r, double out[3]) {
    std::uint64_t s1[3] = {0, 0, 0};
    std::uint64_t s2[3] = {0, 0, 0};
    for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) {
            const Rgb p = img.at(x, y);
            const std::uint64_t ch[3] = {p.r, p.g, p.b};
            for (int c = 0; c < 3; ++c) {
                s1[c] += ch[c];
                s2[c] += ch[c] * ch[c];
            }
        }
    }
    const std::uint64_t n = static_cast<std::uint64_t>(r.w) * r.h;
    for (int c = 0; c < 3; ++c) {
        const unsigned __int128 num =
            static_cast<unsigned __int128>(n) * s2[c] - static_cast<unsigned __int128>(s1[c]) * s1[c];
        out[c] = static_cast<double>(num) / (static_cast<double>(n) * static_cast<double>(n));
    }
}

}  // namespace

TEST_CASE("stats") {
    SECTION("constant sample has zero spread") {
        const std::vector<double> v{5, 5, 5};
        const SampleStats s = stats(v);
        CHECK(s.n == 3);
        CHECK(s.mean == 5.0);
        CHECK(s.sum_sq_dev == 0.0);
        CHECK(s.variance == 0.0);
    }
    SECTION("two-point sample is exact") {
        const std::vector<double> v{0, 255};
        const SampleStats s = stats(v);
        CHECK(s.mean == 127.5);
        CHECK(s.sum_sq_dev == 32512.5);
        CHECK(s.variance == 16256.25);
    }
    SECTION("matches a two-pass long double oracle on random data") {
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 1 + rng() % 3000;
            std::vector<double> v(n);
            // Large offset makes naive sum-of-squares formulas lose digits;
            // Welford should not.
            const double offset = (trial % 2) ? 1e9 : 0.0;
            for (double& x : v) x = offset + static_cast<double>(rng() % 100000) / 7.0;
            const SampleStats a = stats(v);
            const SampleStats b = stats_oracle(v);
            CHECK(rel_diff(a.mean, b.mean) < 1e-9);
            CHECK(rel_diff(a.sum_sq_dev, b.sum_sq_dev) < 1e-9);
            CHECK(rel_diff(a.variance, b.variance) < 1e-9);
            CHECK(a.n == n);
        }
    }
    SECTION("permutation leaves the result unchanged within tolerance") {
        std::vector<double> v;
        std::mt19937_64 rng(7);
        for (int i = 0; i < 500; ++i) v.push_back(static_cast<double>(rng() % 4096) / 3.0);
        const SampleStats a = stats(v);
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
        const SampleStats b = stats(v);
        CHECK(rel_diff(a.mean, b.mean) < 1e-12);
        CHECK(rel_diff(a.sum_sq_dev, b.sum_sq_dev) < 1e-9);
    }
    SECTION("empty input throws") {
        CHECK_THROWS_AS(stats(std::vector<double>{}), EmptySample);
    }
}

TEST_CASE("histogram") {
    SECTION("counts a small region by hand") {
        RgbImage img(3, 2);
        img.at(0, 0) = {1, 2, 3};
        img.at(1, 0) = {1, 2, 3};
        img.at(2, 0) = {200, 2, 3};
        img.at(0, 1) = {1, 50, 3};
        img.at(1, 1) = {1, 2, 90};
        img.at(2, 1) = {1, 2, 3};
        const RgbHistogram h = histogram(img, Rect{0, 0, 3, 2});
        CHECK(h.pixel_count == 6);
        CHECK(h.bins[0][1] == 5);
        CHECK(h.bins[0][200] == 1);
        CHECK(h.bins[1][2] == 5);
        CHECK(h.bins[1][50] == 1);
        CHECK(h.bins[2][3] == 5);
        CHECK(h.bins[2][90] == 1);
    }
    SECTION("per-channel counts always sum to the region area") {
        const RgbImage img = testutil::noise_rgb(40, 30, 4);
        const RgbHistogram h = histogram(img, Rect{5, 3, 17, 11});
        for (int c = 0; c < 3; ++c) {
            std::uint64_t sum = 0;
            for (int v = 0; v < 256; ++v) sum += h.bins[static_cast<std::size_t>(c)][v];
            CHECK(sum == 17u * 11u);
        }
    }
    SECTION("rejects regions outside the image") {
        const RgbImage img(10, 10);
        CHECK_THROWS_AS(histogram(img, Rect{-1, 0, 5, 5}), RegionOutOfBounds);
        CHECK_THROWS_AS(histogram(img, Rect{8, 8, 5, 5}), RegionOutOfBounds);
        CHECK_THROWS_AS(histogram(img, Rect{0, 0, 0, 5}), RegionOutOfBounds);
    }
}

TEST_CASE("colour_variance in chroma mode") {
    SECTION("neutral pixels score exactly zero") {
        const RgbImage img(16, 16, Rgb{190, 190, 190});
        CHECK(colour_variance(img, Rect{0, 0, 16, 16}).value == 0.0);
    }
    SECTION("uniform pure red scores exactly 14450") {
        const RgbImage img(8, 8, Rgb{255, 0, 0});
        const ColourVarianceScore s = colour_variance(img, Rect{0, 0, 8, 8});
        CHECK(s.value == 14450.0);  // variance of {255, 0, 0}
        CHECK(s.mode == VarianceMode::Chroma);
    }
    SECTION("matches a per-pixel floating point oracle") {
        const RgbImage img = testutil::noise_rgb(64, 48, 23);
        std::mt19937_64 rng(66);
        for (int trial = 0; trial < 12; ++trial) {
            const int w = 1 + static_cast<int>(rng() % 32);
            const int h = 1 + static_cast<int>(rng() % 24);
            const int x = static_cast<int>(rng() % (64 - w + 1));
            const int y = static_cast<int>(rng() % (48 - h + 1));
            const Rect r{x, y, w, h};
            CHECK(rel_diff(colour_variance(img, r).value, chroma_oracle(img, r)) < 1e-9);
        }
    }
    SECTION("invariant under channel permutation") {
        const RgbImage img = testutil::noise_rgb(20, 20, 31);
        RgbImage rotated(20, 20);
        for (std::size_t i = 0; i < img.data.size(); ++i) {
            rotated.data[i] = Rgb{img.data[i].g, img.data[i].b, img.data[i].r};
        }
        const Rect r{2, 3, 15, 14};
        CHECK(colour_variance(img, r).value == colour_variance(rotated, r).value);
    }
}

TEST_CASE("colour_variance per channel modes") {
    SECTION("histogram route equals the direct pixel route exactly") {
        const RgbImage img = testutil::noise_rgb(50, 40, 91);
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            const int w = 1 + static_cast<int>(rng() % 40);
            const int h = 1 + static_cast<int>(rng() % 30);
            const Rect r{static_cast<int>(rng() % (50 - w + 1)),
                         static_cast<int>(rng() % (40 - h + 1)), w, h};
            double ref[3];
            channel_variances_oracle(img, r, ref);
            const double expected_max = std::max({ref[0], ref[1], ref[2]});
            const double expected_mean = (ref[0] + ref[1] + ref[2]) / 3.0;
            CHECK(colour_variance(img, r, VarianceMode::PerChannelMax).value == expected_max);
            CHECK(colour_variance(img, r, VarianceMode::PerChannelMean).value == expected_mean);
        }
    }
    SECTION("max dominates mean, both zero on uniform input") {
        const RgbImage noise = testutil::noise_rgb(30, 30, 2);
        const Rect r{0, 0, 30, 30};
        CHECK(colour_variance(noise, r, VarianceMode::PerChannelMax).value >=
              colour_variance(noise, r, VarianceMode::PerChannelMean).value);
        const RgbImage flat(12, 12, Rgb{40, 80, 120});
        CHECK(colour_variance(flat, Rect{0, 0, 12, 12}, VarianceMode::PerChannelMax).value == 0.0);
        CHECK(colour_variance(flat, Rect{0, 0, 12, 12}, VarianceMode::PerChannelMean).value == 0.0);
        // A uniform saturated colour has spread across channels but none
        // within any channel; chroma mode sees it, per-channel modes do not.
        const RgbImage red(12, 12, Rgb{255, 0, 0});
        CHECK(colour_variance(red, Rect{0, 0, 12, 12}, VarianceMode::PerChannelMax).value == 0.0);
        CHECK(colour_variance(red, Rect{0, 0, 12, 12}).value == 14450.0);
    }
    SECTION("region checks apply to every mode") {
        const RgbImage img(10, 10);
        for (VarianceMode m : {VarianceMode::Chroma, VarianceMode::PerChannelMax,
                               VarianceMode::PerChannelMean}) {
            CHECK_THROWS_AS(colour_variance(img, Rect{5, 5, 10, 2}, m), RegionOutOfBounds);
            CHECK_THROWS_AS(colour_variance(img, Rect{0, 0, 0, 0}, m), RegionOutOfBounds);
        }
    }
}
