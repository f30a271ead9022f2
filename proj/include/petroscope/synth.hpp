#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "petroscope/error.hpp"
#include "petroscope/grid.hpp"
#include "petroscope/image.hpp"
#include "petroscope/image_io.hpp"
#include "petroscope/qapf.hpp"
#include "petroscope/version.hpp"

namespace petroscope {

// One mineral patch, axis-aligned and expressed in grid cells.
struct RegionSpec {
    CellLabel mineral = CellLabel::Other;  // Other renders as striped feldspar
    Rect cells;                            // cell-coordinate rectangle
};

struct SyntheticSample {
    RgbImage image;                      // always 512x384
    int grid = 0;                        // cells per axis the truth refers to
    std::vector<CellLabel> truth_cells;  // row-major, grid^2 entries
    RockType truth_rock{};
    std::uint64_t seed = 0;
};

namespace synth_detail {

// All textures share one quantized luma (190) so the grayscale raster is
// perfectly flat except inside feldspar stripe zones: edge detection then
// fires only in feldspar cells, at any threshold, which is what makes the
// generated ground truth exact rather than approximate.
inline constexpr int kFlatLuma = 190;

// Channel offsets whose Rec.601 luma shift stays below 0.36, so adding any
// of them to a base whose luma is within 0.13 of an integer cannot move the
// rounded gray value. Per-pixel colour variance from a delta alone is at
// most 1.56.
inline constexpr std::array<std::array<int, 3>, 9> kJitter = {{
    {{0, 0, 0}},
    {{2, -1, 0}},
    {{-2, 1, 0}},
    {{1, 0, -1}},
    {{-1, 0, 1}},
    {{0, 1, -2}},
    {{0, -1, 2}},
    {{1, -1, 1}},
    {{-1, 1, -1}},
}};

// Saturated bases that still round to luma 190. Each has per-pixel colour
// variance >= 2500; jitter can lower that by a few hundred at most, which
// keeps every accessory pixel far above any variance threshold in use.
inline constexpr std::array<std::array<int, 3>, 8> kAccessoryPalette = {{
    {{52, 250, 243}},
    {{249, 185, 61}},
    {{124, 251, 49}},
    {{204, 212, 40}},
    {{131, 208, 252}},
    {{253, 146, 252}},
    {{85, 253, 141}},
    {{78, 242, 216}},
}};

// Stripe texture for feldspar: a gray sine of period 6 px and amplitude 60,
// faded to exactly zero within 6 px of the region border. The Gaussian blur
// radius at sigma 1.4 is 5 px and Sobel reaches 1 px further, so every
// pixel outside a feldspar region sees only flat gray through the whole
// pipeline and its gradient cancels to exactly zero.
inline constexpr int kStripePeriod = 6;
inline constexpr int kStripeAmplitude = 60;
inline constexpr int kStripeMargin = 5;   // env == 0 while border distance <= margin
inline constexpr double kStripeRamp = 4.0;

inline std::uint8_t stripe_value(int t, int t0, int border_dist) {
    const double env =
        std::clamp((border_dist - kStripeMargin) / kStripeRamp, 0.0, 1.0);
    const double phase = 2.0 * std::numbers::pi * (t - t0) / kStripePeriod;
    const int v = kFlatLuma + round_half_up(env * kStripeAmplitude * std::sin(phase));
    return static_cast<std::uint8_t>(v);
}

// Fisher-Yates with raw engine draws: mt19937_64 output is standardized,
// std::shuffle's internals are not.
template <typename T>
inline void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

inline Rect cells_to_pixels(const GridSpec& spec, const Rect& cells) {
    const Rect first = spec.cell_rect(cells.x, cells.y);
    const Rect last = spec.cell_rect(cells.x + cells.w - 1, cells.y + cells.h - 1);
    return Rect{first.x, first.y, last.x + last.w - first.x, last.y + last.h - first.y};
}

}  // namespace synth_detail

// Renders a tiling of mineral regions into a 512x384 image. The region list
// must cover every cell of the grid exactly once. The truth rock is the
// unique composition-table row containing the resulting cell percentages;
// zero or several containing rows reject the layout as ambiguous.
inline SyntheticSample generate(const std::vector<RegionSpec>& regions, int grid,
                                std::uint64_t seed) {
    const GridSpec spec = make_grid(kWorkingWidth, kWorkingHeight, grid);
    std::vector<int> coverage(static_cast<std::size_t>(spec.cell_count()), 0);
    for (const RegionSpec& r : regions) {
        if (r.cells.x < 0 || r.cells.y < 0 || r.cells.w < 1 || r.cells.h < 1 ||
            r.cells.x + r.cells.w > grid || r.cells.y + r.cells.h > grid) {
            throw RegionOutOfBounds("generate: region outside the cell grid");
        }
        for (int cy = r.cells.y; cy < r.cells.y + r.cells.h; ++cy) {
            for (int cx = r.cells.x; cx < r.cells.x + r.cells.w; ++cx) {
                ++coverage[static_cast<std::size_t>(cy) * grid + cx];
            }
        }
    }
    for (int c : coverage) {
        if (c != 1) throw Error("generate: regions must tile the grid exactly once");
    }

    std::mt19937_64 rng(seed);
    SyntheticSample out;
    out.image = RgbImage(kWorkingWidth, kWorkingHeight);
    out.grid = grid;
    out.truth_cells.assign(static_cast<std::size_t>(spec.cell_count()), CellLabel::Other);
    out.seed = seed;

    using synth_detail::kJitter;
    for (const RegionSpec& r : regions) {
        for (int cy = r.cells.y; cy < r.cells.y + r.cells.h; ++cy) {
            for (int cx = r.cells.x; cx < r.cells.x + r.cells.w; ++cx) {
                out.truth_cells[static_cast<std::size_t>(cy) * grid + cx] = r.mineral;
            }
        }
        const Rect px = synth_detail::cells_to_pixels(spec, r.cells);
        if (r.mineral == CellLabel::Other) {
            const bool vertical = (rng() & 1) != 0;
            for (int y = px.y; y < px.y + px.h; ++y) {
                for (int x = px.x; x < px.x + px.w; ++x) {
                    const int border_dist = std::min(std::min(x - px.x, px.x + px.w - 1 - x),
                                                     std::min(y - px.y, px.y + px.h - 1 - y));
                    const std::uint8_t v =
                        vertical ? synth_detail::stripe_value(x, px.x, border_dist)
                                 : synth_detail::stripe_value(y, px.y, border_dist);
                    out.image.at(x, y) = Rgb{v, v, v};
                }
            }
        } else {
            std::array<int, 3> base = {synth_detail::kFlatLuma, synth_detail::kFlatLuma,
                                       synth_detail::kFlatLuma};
            if (r.mineral == CellLabel::Accessory) {
                base = synth_detail::kAccessoryPalette[rng() % synth_detail::kAccessoryPalette.size()];
            }
            for (int y = px.y; y < px.y + px.h; ++y) {
                for (int x = px.x; x < px.x + px.w; ++x) {
                    const auto& d = kJitter[rng() % kJitter.size()];
                    out.image.at(x, y) = Rgb{static_cast<std::uint8_t>(base[0] + d[0]),
                                             static_cast<std::uint8_t>(base[1] + d[1]),
                                             static_cast<std::uint8_t>(base[2] + d[2])};
                }
            }
        }
    }

    int quartz = 0;
    int accessory = 0;
    for (CellLabel l : out.truth_cells) {
        if (l == CellLabel::Quartz) ++quartz;
        if (l == CellLabel::Accessory) ++accessory;
    }
    const double q_pct = 100.0 * quartz / spec.cell_count();
    const double a_pct = 100.0 * accessory / spec.cell_count();
    std::vector<RockType> matched;
    for (const RockRange& row : rock_table()) {
        if (row.quartz.contains(q_pct) && row.accessory.contains(a_pct)) {
            matched.push_back(row.rock);
        }
    }
    if (matched.size() != 1) {
        throw AmbiguousTruth("generate: layout composition q=" + std::to_string(q_pct) + "% a=" +
                             std::to_string(a_pct) + "% matches " + std::to_string(matched.size()) +
                             " table rows");
    }
    out.truth_rock = matched.front();
    return out;
}

// Fixed per-class layouts. The grid is chosen so the class is unambiguous
// and so that grain size varies across classes; Tonalite uses the finest
// grid with feldspar in 2x2-cell blocks, because a striped patch needs more
// than one 16x12 cell to fit its fade-out margin.
struct ClassProfile {
    RockType rock{};
    int truth_grid = 0;
    int quartz_cells = 0;
    int accessory_cells = 0;  // remaining cells are feldspar
};

inline const std::array<ClassProfile, 4>& corpus_profiles() {
    static const std::array<ClassProfile, 4> profiles = {{
        {RockType::Granite, 16, 92, 20},     // q 35.94%, a 7.81%
        {RockType::Adamellite, 16, 28, 64},  // q 10.94%, a 25.00%
        {RockType::Tonalite, 32, 320, 304},  // q 31.25%, a 29.69%
        {RockType::Diorite, 8, 0, 17},       // q 0.00%,  a 26.56%
    }};
    return profiles;
}

inline const ClassProfile& profile_for(RockType rock) {
    for (const ClassProfile& p : corpus_profiles()) {
        if (p.rock == rock) return p;
    }
    throw Error("profile_for: unknown rock");
}

// Scatters a profile's cell budget over the grid. Feldspar is laid out as
// 2x2-cell blocks on 32-cell grids (see ClassProfile), single cells
// otherwise; quartz and accessory fill the remaining cells one by one.
inline std::vector<RegionSpec> scatter_layout(const ClassProfile& profile, std::mt19937_64& rng) {
    const int g = profile.truth_grid;
    const int total = g * g;
    const int feldspar = total - profile.quartz_cells - profile.accessory_cells;
    std::vector<RegionSpec> regions;
    std::vector<int> loose_cells;

    if (g % 2 == 0 && g >= 32) {
        const int bg = g / 2;
        if (feldspar % 4 != 0) throw Error("scatter_layout: block feldspar needs a multiple of 4");
        std::vector<int> blocks(static_cast<std::size_t>(bg) * bg);
        for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] = static_cast<int>(i);
        synth_detail::shuffle_deterministic(blocks, rng);
        const int feldspar_blocks = feldspar / 4;
        for (int i = 0; i < feldspar_blocks; ++i) {
            const int bx = blocks[static_cast<std::size_t>(i)] % bg;
            const int by = blocks[static_cast<std::size_t>(i)] / bg;
            regions.push_back(RegionSpec{CellLabel::Other, Rect{2 * bx, 2 * by, 2, 2}});
        }
        for (std::size_t i = static_cast<std::size_t>(feldspar_blocks); i < blocks.size(); ++i) {
            const int bx = blocks[i] % bg;
            const int by = blocks[i] / bg;
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    loose_cells.push_back((2 * by + dy) * g + (2 * bx + dx));
                }
            }
        }
        synth_detail::shuffle_deterministic(loose_cells, rng);
    } else {
        loose_cells.resize(static_cast<std::size_t>(total));
        for (int i = 0; i < total; ++i) loose_cells[static_cast<std::size_t>(i)] = i;
        synth_detail::shuffle_deterministic(loose_cells, rng);
        for (int i = 0; i < feldspar; ++i) {
            const int c = loose_cells[static_cast<std::size_t>(i)];
            regions.push_back(RegionSpec{CellLabel::Other, Rect{c % g, c / g, 1, 1}});
        }
        loose_cells.erase(loose_cells.begin(), loose_cells.begin() + feldspar);
    }

    for (int i = 0; i < profile.quartz_cells; ++i) {
        const int c = loose_cells[static_cast<std::size_t>(i)];
        regions.push_back(RegionSpec{CellLabel::Quartz, Rect{c % g, c / g, 1, 1}});
    }
    for (int i = 0; i < profile.accessory_cells; ++i) {
        const int c = loose_cells[static_cast<std::size_t>(profile.quartz_cells + i)];
        regions.push_back(RegionSpec{CellLabel::Accessory, Rect{c % g, c / g, 1, 1}});
    }
    return regions;
}

inline SyntheticSample generate_class_sample(RockType rock, std::uint64_t seed) {
    const ClassProfile& profile = profile_for(rock);
    std::mt19937_64 master(seed);
    const std::vector<RegionSpec> regions = scatter_layout(profile, master);
    SyntheticSample s = generate(regions, profile.truth_grid, master());
    s.seed = seed;
    if (s.truth_rock != rock) throw Error("generate_class_sample: profile no longer maps to its rock");
    return s;
}

struct CorpusPaths {
    std::filesystem::path manifest;
    std::filesystem::path meta;
    int images = 0;
};

// Writes per_class images for each rock plus a manifest (path,rock,section)
// and a JSON sidecar recording how to regenerate the corpus. Images pair up
// into sections of two, mimicking several shots of one thin section.
inline CorpusPaths generate_corpus(int per_class, std::uint64_t seed,
                                   const std::filesystem::path& out_dir) {
    if (per_class < 1) throw Error("generate_corpus: per_class must be >= 1");
    std::filesystem::create_directories(out_dir);
    std::mt19937_64 master(seed);

    std::string manifest_text = "path,rock,section\n";
    int images = 0;
    for (const ClassProfile& profile : corpus_profiles()) {
        for (int i = 0; i < per_class; ++i) {
            const std::uint64_t sample_seed = master();
            const SyntheticSample s = generate_class_sample(profile.rock, sample_seed);
            const std::string name = std::string(to_string(profile.rock)) + "_" +
                                     std::to_string(i) + ".png";
            write_png(out_dir / name, s.image);
            manifest_text += name;
            manifest_text += ',';
            manifest_text += to_string(profile.rock);
            manifest_text += ',';
            manifest_text += std::string(to_string(profile.rock)) + "_s" + std::to_string(i / 2);
            manifest_text += '\n';
            ++images;
        }
    }

    CorpusPaths out;
    out.manifest = out_dir / "manifest.csv";
    out.meta = out_dir / "corpus_meta.json";
    out.images = images;
    {
        std::ofstream m(out.manifest, std::ios::binary | std::ios::trunc);
        if (!m) throw IoError("cannot create " + out.manifest.string());
        m << manifest_text;
    }
    nlohmann::ordered_json meta;
    meta["generated_by"] = std::string(kGeneratedBy);
    meta["seed"] = seed;
    meta["rng"] = "mt19937_64";
    meta["per_class"] = per_class;
    nlohmann::ordered_json grids;
    for (const ClassProfile& p : corpus_profiles()) {
        grids[to_string(p.rock)] = p.truth_grid;
    }
    meta["truth_grids"] = grids;
    {
        std::ofstream m(out.meta, std::ios::binary | std::ios::trunc);
        if (!m) throw IoError("cannot create " + out.meta.string());
        m << meta.dump(2) << "\n";
    }
    return out;
}

}  // namespace petroscope
