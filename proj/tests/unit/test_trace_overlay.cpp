#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "petroscope/overlay.hpp"
#include "petroscope/synth.hpp"
#include "petroscope/trace.hpp"

using namespace petroscope;

TEST_CASE("the run log for a quartz-free sample is frozen") {
    const SyntheticSample s = generate_class_sample(RockType::Diorite, 7);
    ParamSet p;
    p.grid = 8;
    p.t_nonzero = 0.01;
    p.t_variance = 50.0;
    p.canny.t_high = 0.01;
    const ImageClassification ic = classify_image(s.image, p);
    const RockDecision d = classify_rock(100.0 * ic.percentages.quartz_fraction,
                                         100.0 * ic.percentages.accessory_fraction);
    const std::string trace =
        classify_trace("corpus/Diorite_0.png", ic.cells.spec, p, ic.percentages, d);
    // the cell counts are fixed by the class profile, so this exact text is
    // reproduced for any generation seed
    const std::string expected =
        "Sample of 8x8 analysis result\n"
        "Opening corpus/Diorite_0.png\n"
        "Params = 8x8\n"
        "Image resolution 512 x 384\n"
        "Cell resolution 64x48\n"
        "Number of cells 64\n"
        "t nonzero 0.01\n"
        "Accessory Minerals 17/64 (0.265625)\n"
        "t variance 50\n"
        "Quartz 0/64 (0.000000)\n"
        "It's a Diorite!\n";
    REQUIRE(trace == expected);
}

TEST_CASE("the run log reports unmatched compositions with their nearest rock") {
    MineralPercentages pct;
    pct.quartz_cells = 10;
    pct.accessory_cells = 0;
    pct.total_cells = 16;
    pct.quartz_fraction = 0.625;
    pct.accessory_fraction = 0.0;
    const RockDecision d = classify_rock(62.5, 0.0);
    REQUIRE_FALSE(d.label.has_value());

    ParamSet p;
    p.grid = 4;
    p.t_nonzero = 0.05;
    p.t_variance = 220.5;
    const GridSpec spec = make_grid(512, 384, 4);
    const std::string trace = classify_trace("x.png", spec, p, pct, d);
    const std::string expected =
        "Sample of 4x4 analysis result\n"
        "Opening x.png\n"
        "Params = 4x4\n"
        "Image resolution 512 x 384\n"
        "Cell resolution 128x96\n"
        "Number of cells 16\n"
        "t nonzero 0.05\n"
        "Accessory Minerals 0/16 (0.000000)\n"
        "t variance 220.5\n"
        "Quartz 10/16 (0.625000)\n"
        "Unclassified (nearest: Granite)\n";
    REQUIRE(trace == expected);
}

namespace {

// Independent per-pixel recomputation of the overlay: tinted cells win over
// grid lines, lines win over source pixels.
Rgb overlay_oracle(const RgbImage& src, const CellLabelGrid& cells, int x, int y) {
    const GridSpec& spec = cells.spec;
    const int bw = spec.base_cell_width();
    const int bh = spec.base_cell_height();
    const int cx = std::min(x / bw, spec.cells - 1);
    const int cy = std::min(y / bh, spec.cells - 1);
    const CellLabel l = cells.at(cx, cy);
    if (l != CellLabel::Other) {
        const Rgb tint = (l == CellLabel::Quartz) ? overlay_detail::kQuartzTint
                                                  : overlay_detail::kAccessoryTint;
        const Rgb s = src.at(x, y);
        const auto mix = [](int a, int b) {
            return static_cast<std::uint8_t>(std::floor(0.65 * a + 0.35 * b + 0.5));
        };
        return Rgb{mix(s.r, tint.r), mix(s.g, tint.g), mix(s.b, tint.b)};
    }
    const bool on_line = (x < bw * spec.cells && x % bw == 0) || x == src.width - 1 ||
                         (y < bh * spec.cells && y % bh == 0) || y == src.height - 1;
    if (on_line) return overlay_detail::kGridLine;
    return src.at(x, y);
}

}  // namespace

TEST_CASE("the overlay matches a per-pixel oracle") {
    auto check_against_oracle = [](int w, int h, int g, std::uint64_t seed) {
        const RgbImage src = testutil::noise_rgb(w, h, seed);
        CellLabelGrid cells;
        cells.spec = make_grid(w, h, g);
        cells.labels.resize(static_cast<std::size_t>(g) * g);
        for (std::size_t i = 0; i < cells.labels.size(); ++i) {
            cells.labels[i] = static_cast<CellLabel>(i % 3);  // Q, A, O round-robin
        }
        const RgbImage out = render_overlay(src, cells);
        REQUIRE(out.width == w);
        REQUIRE(out.height == h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                REQUIRE(out.at(x, y) == overlay_oracle(src, cells, x, y));
            }
        }
    };
    SECTION("an exact tiling") { check_against_oracle(20, 15, 5, 21); }
    SECTION("remainder cells absorb the ragged edge") { check_against_oracle(17, 13, 5, 22); }
    SECTION("working resolution") { check_against_oracle(512, 384, 8, 23); }
}

TEST_CASE("an all-Other overlay differs from the source only on grid lines") {
    const RgbImage src = testutil::noise_rgb(64, 48, 5);
    CellLabelGrid cells;
    cells.spec = make_grid(64, 48, 4);
    cells.labels.assign(16, CellLabel::Other);
    const RgbImage out = render_overlay(src, cells);
    const int bw = 16, bh = 12;
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
            const bool on_line = x % bw == 0 || y % bh == 0 || x == 63 || y == 47;
            if (on_line) {
                REQUIRE(out.at(x, y) == overlay_detail::kGridLine);
            } else {
                REQUIRE(out.at(x, y) == src.at(x, y));
            }
        }
    }
}

TEST_CASE("the overlay rejects a mismatched source image") {
    CellLabelGrid cells;
    cells.spec = make_grid(64, 48, 4);
    cells.labels.assign(16, CellLabel::Other);
    const RgbImage wrong(32, 48);
    CHECK_THROWS_AS(render_overlay(wrong, cells), DimensionMismatch);
}
