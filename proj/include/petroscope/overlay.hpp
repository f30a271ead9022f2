#pragma once

#include "petroscope/error.hpp"
#include "petroscope/grid.hpp"
#include "petroscope/image.hpp"

namespace petroscope {

namespace overlay_detail {

inline constexpr Rgb kGridLine = {32, 32, 32};
inline constexpr Rgb kQuartzTint = {64, 96, 255};
inline constexpr Rgb kAccessoryTint = {255, 64, 64};
inline constexpr double kKeep = 0.65;  // share of the source pixel in a tint

inline Rgb blend(Rgb src, Rgb tint) {
    const auto mix = [](std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>(round_half_up(kKeep * a + (1.0 - kKeep) * b));
    };
    return Rgb{mix(src.r, tint.r), mix(src.g, tint.g), mix(src.b, tint.b)};
}

}  // namespace overlay_detail

// Diagnostic rendering: grid lines on every cell boundary, then a colour
// tint over quartz and accessory cells (tinting covers the lines inside
// those cells). Cells labelled Other keep their source pixels.
inline RgbImage render_overlay(const RgbImage& src, const CellLabelGrid& cells) {
    const GridSpec& spec = cells.spec;
    if (src.width != spec.image_width || src.height != spec.image_height) {
        throw DimensionMismatch("render_overlay: image does not match the label grid");
    }
    RgbImage out = src;

    for (int cx = 0; cx < spec.cells; ++cx) {
        const int x = spec.cell_rect(cx, 0).x;
        for (int y = 0; y < out.height; ++y) out.at(x, y) = overlay_detail::kGridLine;
    }
    for (int y = 0; y < out.height; ++y) out.at(out.width - 1, y) = overlay_detail::kGridLine;
    for (int cy = 0; cy < spec.cells; ++cy) {
        const int y = spec.cell_rect(0, cy).y;
        for (int x = 0; x < out.width; ++x) out.at(x, y) = overlay_detail::kGridLine;
    }
    for (int x = 0; x < out.width; ++x) out.at(x, out.height - 1) = overlay_detail::kGridLine;

    for (int cy = 0; cy < spec.cells; ++cy) {
        for (int cx = 0; cx < spec.cells; ++cx) {
            const CellLabel l = cells.at(cx, cy);
            if (l == CellLabel::Other) continue;
            const Rgb tint = (l == CellLabel::Quartz) ? overlay_detail::kQuartzTint
                                                      : overlay_detail::kAccessoryTint;
            const Rect r = spec.cell_rect(cx, cy);
            for (int y = r.y; y < r.y + r.h; ++y) {
                for (int x = r.x; x < r.x + r.w; ++x) {
                    out.at(x, y) = overlay_detail::blend(src.at(x, y), tint);
                }
            }
        }
    }
    return out;
}

}  // namespace petroscope
