#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "petroscope/canny.hpp"
#include "petroscope/sweep.hpp"
#include "petroscope/synth.hpp"

using namespace petroscope;
namespace fs = std::filesystem;

namespace {

// One explicit 4x4 layout: a 2x2 feldspar block, five loose feldspar cells,
// six quartz cells and one accessory cell. q 37.5% / a 6.25% matches only
// the granite row.
std::vector<RegionSpec> explicit_layout() {
    return {
        {CellLabel::Other, Rect{0, 0, 2, 2}},
        {CellLabel::Other, Rect{2, 0, 1, 1}},
        {CellLabel::Other, Rect{3, 0, 1, 1}},
        {CellLabel::Other, Rect{2, 1, 1, 1}},
        {CellLabel::Other, Rect{3, 1, 1, 1}},
        {CellLabel::Other, Rect{0, 2, 1, 1}},
        {CellLabel::Quartz, Rect{1, 2, 1, 1}},
        {CellLabel::Quartz, Rect{2, 2, 1, 1}},
        {CellLabel::Quartz, Rect{3, 2, 1, 1}},
        {CellLabel::Quartz, Rect{0, 3, 1, 1}},
        {CellLabel::Quartz, Rect{1, 3, 1, 1}},
        {CellLabel::Quartz, Rect{2, 3, 1, 1}},
        {CellLabel::Accessory, Rect{3, 3, 1, 1}},
    };
}

std::vector<std::string> sorted_files(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("generate validates its tiling") {
    auto regions = explicit_layout();
    SECTION("the explicit layout passes") {
        const SyntheticSample s = generate(regions, 4, 1);
        CHECK(s.truth_rock == RockType::Granite);
        CHECK(s.image.width == 512);
        CHECK(s.image.height == 384);
        CHECK(s.truth_cells.size() == 16);
    }
    SECTION("an uncovered cell is rejected") {
        regions.pop_back();
        CHECK_THROWS_AS(generate(regions, 4, 1), Error);
    }
    SECTION("an overlap is rejected") {
        regions.push_back({CellLabel::Quartz, Rect{3, 3, 1, 1}});
        CHECK_THROWS_AS(generate(regions, 4, 1), Error);
    }
    SECTION("a region past the grid edge is rejected") {
        regions.push_back({CellLabel::Quartz, Rect{3, 4, 1, 1}});
        CHECK_THROWS_AS(generate(regions, 4, 1), RegionOutOfBounds);
    }
    SECTION("a composition matching no table row is rejected") {
        // all quartz: q 100% sits outside every quartz interval
        std::vector<RegionSpec> all_q;
        for (int cy = 0; cy < 4; ++cy)
            for (int cx = 0; cx < 4; ++cx) all_q.push_back({CellLabel::Quartz, Rect{cx, cy, 1, 1}});
        CHECK_THROWS_AS(generate(all_q, 4, 1), AmbiguousTruth);
    }
    SECTION("a composition matching two rows is rejected") {
        // q 5/16 = 31.25%, a 2/16 = 12.5% sits inside both granite and tonalite
        std::vector<RegionSpec> dual;
        int placed = 0;
        for (int cy = 0; cy < 4; ++cy) {
            for (int cx = 0; cx < 4; ++cx) {
                CellLabel l = CellLabel::Other;
                if (placed < 5) l = CellLabel::Quartz;
                else if (placed < 7) l = CellLabel::Accessory;
                dual.push_back({l, Rect{cx, cy, 1, 1}});
                ++placed;
            }
        }
        CHECK_THROWS_AS(generate(dual, 4, 1), AmbiguousTruth);
    }
}

TEST_CASE("every texture shares one quantized gray level") {
    const SyntheticSample s = generate(explicit_layout(), 4, 77);
    const GrayImage gray = to_grayscale(s.image);
    const GridSpec spec = make_grid(512, 384, 4);
    int striped = 0;
    for (int cy = 0; cy < 4; ++cy) {
        for (int cx = 0; cx < 4; ++cx) {
            const Rect r = spec.cell_rect(cx, cy);
            const CellLabel l = s.truth_cells[static_cast<std::size_t>(cy) * 4 + cx];
            for (int y = r.y; y < r.y + r.h; ++y) {
                for (int x = r.x; x < r.x + r.w; ++x) {
                    if (l != CellLabel::Other) {
                        // quartz and accessory quantize to flat gray everywhere
                        REQUIRE(static_cast<int>(gray.at(x, y)) == synth_detail::kFlatLuma);
                    } else if (gray.at(x, y) != synth_detail::kFlatLuma) {
                        ++striped;
                    }
                }
            }
        }
    }
    CHECK(striped > 0);  // feldspar interiors do carry stripes

    // feldspar fades to the shared gray well before its region border, so a
    // 5 px blur radius plus 1 px of Sobel reach never crosses texture
    const Rect block_px = synth_detail::cells_to_pixels(spec, Rect{0, 0, 2, 2});
    for (int y = block_px.y; y < block_px.y + block_px.h; ++y) {
        for (int x = block_px.x; x < block_px.x + block_px.w; ++x) {
            const int bd = std::min(std::min(x - block_px.x, block_px.x + block_px.w - 1 - x),
                                    std::min(y - block_px.y, block_px.y + block_px.h - 1 - y));
            if (bd <= synth_detail::kStripeMargin) {
                REQUIRE(static_cast<int>(gray.at(x, y)) == synth_detail::kFlatLuma);
            }
        }
    }
}

TEST_CASE("edges land only in feldspar truth cells") {
    for (std::uint64_t seed : {3u, 44u, 505u}) {
        const SyntheticSample s = generate(explicit_layout(), 4, seed);
        CannyParams cp;
        cp.t_high = 0.01;
        const EdgeMap edges = canny(to_grayscale(s.image), cp);
        REQUIRE(edges.count() > 0);
        const GridSpec spec = make_grid(512, 384, 4);
        for (int cy = 0; cy < 4; ++cy) {
            for (int cx = 0; cx < 4; ++cx) {
                const Rect r = spec.cell_rect(cx, cy);
                int hits = 0;
                for (int y = r.y; y < r.y + r.h; ++y)
                    for (int x = r.x; x < r.x + r.w; ++x)
                        hits += edges.mask[static_cast<std::size_t>(y) * edges.width + x] ? 1 : 0;
                const CellLabel l = s.truth_cells[static_cast<std::size_t>(cy) * 4 + cx];
                if (l == CellLabel::Other) {
                    REQUIRE(hits > 0);
                } else {
                    REQUIRE(hits == 0);
                }
            }
        }
    }
}

TEST_CASE("class profiles reproduce their rock exactly") {
    for (const ClassProfile& profile : corpus_profiles()) {
        DYNAMIC_SECTION("rock " << to_string(profile.rock)) {
            const SyntheticSample s = generate_class_sample(profile.rock, 1234);
            CHECK(s.truth_rock == profile.rock);
            CHECK(s.grid == profile.truth_grid);
            int q = 0, a = 0;
            for (CellLabel l : s.truth_cells) {
                if (l == CellLabel::Quartz) ++q;
                if (l == CellLabel::Accessory) ++a;
            }
            CHECK(q == profile.quartz_cells);
            CHECK(a == profile.accessory_cells);

            // classification at the truth grid recovers the truth labels cell
            // by cell, so the rock follows from the table row
            ParamSet p;
            p.grid = profile.truth_grid;
            p.t_nonzero = 0.01;
            p.t_variance = 50.0;
            p.canny.t_high = 0.01;
            const ImageClassification ic = classify_image(s.image, p);
            REQUIRE(ic.cells.labels == s.truth_cells);
            const RockDecision d = classify_rock(100.0 * ic.percentages.quartz_fraction,
                                                 100.0 * ic.percentages.accessory_fraction);
            REQUIRE(d.label.has_value());
            CHECK(*d.label == profile.rock);
        }
    }
}

TEST_CASE("the diorite profile is quartz-free") {
    const ClassProfile& p = profile_for(RockType::Diorite);
    CHECK(p.truth_grid == 8);
    CHECK(p.quartz_cells == 0);
    CHECK(p.accessory_cells == 17);
}

TEST_CASE("generation is deterministic in the seed") {
    const SyntheticSample a = generate_class_sample(RockType::Tonalite, 42);
    const SyntheticSample b = generate_class_sample(RockType::Tonalite, 42);
    CHECK(a.image == b.image);
    CHECK(a.truth_cells == b.truth_cells);
    const SyntheticSample c = generate_class_sample(RockType::Tonalite, 43);
    CHECK_FALSE(a.image == c.image);
}

TEST_CASE("generate_corpus writes images, manifest and metadata") {
    testutil::TempDir dir("synth_corpus");
    const CorpusPaths paths = generate_corpus(2, 99, dir.path());
    CHECK(paths.images == 8);

    const auto names = sorted_files(dir.path());
    REQUIRE(names.size() == 10);  // 8 images + manifest + meta
    CHECK(std::find(names.begin(), names.end(), "Granite_0.png") != names.end());
    CHECK(std::find(names.begin(), names.end(), "Diorite_1.png") != names.end());
    CHECK(std::find(names.begin(), names.end(), "manifest.csv") != names.end());
    CHECK(std::find(names.begin(), names.end(), "corpus_meta.json") != names.end());

    const auto entries = read_manifest(paths.manifest);
    REQUIRE(entries.size() == 8);
    int diorite = 0;
    for (const CorpusEntry& e : entries) {
        if (e.rock == RockType::Diorite) ++diorite;
        CHECK(fs::exists(dir.path() / e.path));
        // two images per section id
        CHECK(e.section == std::string(to_string(e.rock)) + "_s0");
    }
    CHECK(diorite == 2);

    const auto meta = nlohmann::json::parse(slurp(paths.meta));
    CHECK(meta.at("seed").get<std::uint64_t>() == 99);
    CHECK(meta.at("per_class").get<int>() == 2);
    CHECK(meta.at("truth_grids").at("Diorite").get<int>() == 8);

    // each image decodes back to a valid working-resolution raster
    const RgbImage img = decode_file(dir.path() / "Adamellite_0.png");
    CHECK(img.width == 512);
    CHECK(img.height == 384);

    SECTION("regeneration with the same seed is byte-identical") {
        testutil::TempDir dir2("synth_corpus_again");
        generate_corpus(2, 99, dir2.path());
        for (const std::string& name : names) {
            CHECK(slurp(dir.path() / name) == slurp(dir2.path() / name));
        }
    }
    SECTION("a different seed changes the pixels") {
        testutil::TempDir dir3("synth_corpus_other");
        generate_corpus(2, 100, dir3.path());
        CHECK(slurp(dir.path() / "Granite_0.png") != slurp(dir3.path() / "Granite_0.png"));
    }
}

TEST_CASE("generate_corpus rejects a non-positive image count") {
    testutil::TempDir dir("synth_bad");
    CHECK_THROWS_AS(generate_corpus(0, 1, dir.path()), Error);
}
