#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "petroscope/error.hpp"
#include "petroscope/image.hpp"

namespace petroscope {

// Real-valued raster used between pipeline stages.
struct RasterF {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    RasterF() = default;
    RasterF(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Gradient direction quantized to the four NMS sectors.
enum class Sector : std::uint8_t { Deg0 = 0, Deg45 = 1, Deg90 = 2, Deg135 = 3 };

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> magnitude;
    std::vector<Sector> sector;
};

struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // 0 or 1 per pixel

    std::int64_t count() const {
        std::int64_t n = 0;
        for (std::uint8_t v : mask) n += v;
        return n;
    }
};

// Hysteresis thresholds are fractions of the maximum suppressed magnitude:
// strong = t_high * max, weak = low_ratio * strong.
struct CannyParams {
    double sigma = 1.4;
    double t_high = 0.02;
    double low_ratio = 0.4;

    friend bool operator==(const CannyParams&, const CannyParams&) = default;
};

inline void validate(const CannyParams& p) {
    if (!(p.sigma > 0.0)) throw Error("canny: sigma must be > 0");
    if (!(p.t_high > 0.0 && p.t_high <= 1.0)) throw Error("canny: t_high must be in (0, 1]");
    if (!(p.low_ratio > 0.0 && p.low_ratio < 1.0)) throw Error("canny: low_ratio must be in (0, 1)");
}

namespace canny_detail {

inline int clamp_coord(int v, int hi) {
    return v < 0 ? 0 : (v >= hi ? hi - 1 : v);
}

inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double t = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        taps[static_cast<std::size_t>(i + radius)] = t;
        sum += t;
    }
    for (double& t : taps) t /= sum;
    return taps;
}

}  // namespace canny_detail

// Separable Gaussian blur, kernel radius ceil(3 sigma), replicated borders.
inline RasterF gaussian_blur(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) throw Error("gaussian_blur: sigma must be > 0");
    if (img.width < 1 || img.height < 1) throw ImageTooSmall("gaussian_blur: empty image");
    const std::vector<double> taps = canny_detail::gaussian_kernel(sigma);
    const int radius = static_cast<int>(taps.size() / 2);

    RasterF horiz(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int sx = canny_detail::clamp_coord(x + k, img.width);
                acc += taps[static_cast<std::size_t>(k + radius)] * img.at(sx, y);
            }
            horiz.at(x, y) = acc;
        }
    }
    RasterF out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int sy = canny_detail::clamp_coord(y + k, img.height);
                acc += taps[static_cast<std::size_t>(k + radius)] * horiz.at(x, sy);
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

// Nearest of the four sectors to the gradient angle folded into [0, 180);
// exact mid-angle ties go to the lower sector. A zero vector reports Deg0.
inline Sector quantize_sector(double gx, double gy) {
    if (gx == 0.0 && gy == 0.0) return Sector::Deg0;
    double deg = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
    deg = std::fmod(deg + 360.0, 180.0);
    static constexpr std::array<double, 4> bins = {0.0, 45.0, 90.0, 135.0};
    int best = 0;
    double best_d = 1e300;
    for (int i = 0; i < 4; ++i) {
        double d = std::fabs(deg - bins[static_cast<std::size_t>(i)]);
        d = std::min(d, 180.0 - d);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return static_cast<Sector>(best);
}

// 3x3 Sobel with replicated borders. Each derivative is written as a
// difference of two [1,2,1]-smoothed samples so constant neighbourhoods
// cancel to exactly zero. Magnitude is sqrt(gx^2 + gy^2).
inline GradientField sobel_gradients(const RasterF& in) {
    if (in.width < 1 || in.height < 1) throw ImageTooSmall("sobel_gradients: empty raster");
    const int w = in.width;
    const int h = in.height;

    // smooth_v(x, y): [1,2,1] down a column; smooth_h(x, y): across a row.
    RasterF smooth_v(w, h);
    RasterF smooth_h(w, h);
    for (int y = 0; y < h; ++y) {
        const int ym = canny_detail::clamp_coord(y - 1, h);
        const int yp = canny_detail::clamp_coord(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int xm = canny_detail::clamp_coord(x - 1, w);
            const int xp = canny_detail::clamp_coord(x + 1, w);
            smooth_v.at(x, y) = in.at(x, ym) + 2.0 * in.at(x, y) + in.at(x, yp);
            smooth_h.at(x, y) = in.at(xm, y) + 2.0 * in.at(x, y) + in.at(xp, y);
        }
    }

    GradientField out;
    out.width = w;
    out.height = h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    out.gx.resize(n);
    out.gy.resize(n);
    out.magnitude.resize(n);
    out.sector.resize(n);
    for (int y = 0; y < h; ++y) {
        const int ym = canny_detail::clamp_coord(y - 1, h);
        const int yp = canny_detail::clamp_coord(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int xm = canny_detail::clamp_coord(x - 1, w);
            const int xp = canny_detail::clamp_coord(x + 1, w);
            const double gx = smooth_v.at(xp, y) - smooth_v.at(xm, y);
            const double gy = smooth_h.at(x, yp) - smooth_h.at(x, ym);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            out.gx[i] = gx;
            out.gy[i] = gy;
            out.magnitude[i] = std::sqrt(gx * gx + gy * gy);
            out.sector[i] = quantize_sector(gx, gy);
        }
    }
    return out;
}

// Keeps a pixel when its magnitude is >= both neighbours along the gradient
// direction (ties survive); everything else drops to zero. Off-raster
// neighbours are clamped, which compares the pixel against itself and keeps
// it.
inline RasterF non_max_suppress(const GradientField& g) {
    static constexpr std::array<std::array<int, 2>, 4> offsets = {{
        {{1, 0}},   // Deg0
        {{1, 1}},   // Deg45
        {{0, 1}},   // Deg90
        {{-1, 1}},  // Deg135
    }};
    RasterF out(g.width, g.height);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * g.width + x;
            const auto [dx, dy] = offsets[static_cast<std::size_t>(g.sector[i])];
            const int xa = canny_detail::clamp_coord(x + dx, g.width);
            const int ya = canny_detail::clamp_coord(y + dy, g.height);
            const int xb = canny_detail::clamp_coord(x - dx, g.width);
            const int yb = canny_detail::clamp_coord(y - dy, g.height);
            const double m = g.magnitude[i];
            const double ma = g.magnitude[static_cast<std::size_t>(ya) * g.width + xa];
            const double mb = g.magnitude[static_cast<std::size_t>(yb) * g.width + xb];
            out.data[i] = (m >= ma && m >= mb) ? m : 0.0;
        }
    }
    return out;
}

// Double-threshold linking over the suppressed magnitudes. Thresholds scale
// with the raster's own maximum, so a globally rescaled image selects the
// same pixels. A raster whose maximum is zero has no edges at all.
inline EdgeMap hysteresis(const RasterF& suppressed, double t_high, double low_ratio) {
    if (!(t_high > 0.0 && t_high <= 1.0)) throw Error("hysteresis: t_high must be in (0, 1]");
    if (!(low_ratio > 0.0 && low_ratio < 1.0)) throw Error("hysteresis: low_ratio must be in (0, 1)");
    const int w = suppressed.width;
    const int h = suppressed.height;
    EdgeMap out;
    out.width = w;
    out.height = h;
    out.mask.assign(static_cast<std::size_t>(w) * h, 0);

    double max_mag = 0.0;
    for (double v : suppressed.data) max_mag = std::max(max_mag, v);
    if (max_mag <= 0.0) return out;

    const double strong = t_high * max_mag;
    const double weak = low_ratio * strong;

    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (suppressed.data[i] >= strong && !out.mask[i]) {
                out.mask[i] = 1;
                stack.emplace_back(x, y);
                while (!stack.empty()) {
                    const auto [cx, cy] = stack.back();
                    stack.pop_back();
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dx == 0 && dy == 0) continue;
                            const int nx = cx + dx;
                            const int ny = cy + dy;
                            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                            const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                            if (!out.mask[j] && suppressed.data[j] >= weak) {
                                out.mask[j] = 1;
                                stack.emplace_back(nx, ny);
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Suppressed magnitudes for a grayscale image; hysteresis is the only stage
// that depends on t_high, so sweeps cache this and rethreshold.
inline RasterF suppressed_magnitudes(const GrayImage& img, double sigma) {
    return non_max_suppress(sobel_gradients(gaussian_blur(img, sigma)));
}

inline EdgeMap canny(const GrayImage& img, const CannyParams& p = {}) {
    validate(p);
    return hysteresis(suppressed_magnitudes(img, p.sigma), p.t_high, p.low_ratio);
}

}  // namespace petroscope
