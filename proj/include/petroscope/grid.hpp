#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "petroscope/canny.hpp"
#include "petroscope/colorstats.hpp"
#include "petroscope/error.hpp"
#include "petroscope/image.hpp"

namespace petroscope {

// g x g partition of an image. Base cell size is floor(w/g) x floor(h/g);
// the last column and row absorb any remainder, so cells tile exactly.
struct GridSpec {
    int image_width = 0;
    int image_height = 0;
    int cells = 0;  // per axis

    int cell_count() const { return cells * cells; }
    int base_cell_width() const { return image_width / cells; }
    int base_cell_height() const { return image_height / cells; }

    Rect cell_rect(int cx, int cy) const {
        const int bw = base_cell_width();
        const int bh = base_cell_height();
        Rect r;
        r.x = cx * bw;
        r.y = cy * bh;
        r.w = (cx == cells - 1) ? image_width - r.x : bw;
        r.h = (cy == cells - 1) ? image_height - r.y : bh;
        return r;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec make_grid(int width, int height, int cells_per_axis) {
    if (width < 1 || height < 1) throw ImageTooSmall("make_grid: empty image");
    if (cells_per_axis < 1 || cells_per_axis > width || cells_per_axis > height) {
        throw GridTooFine("make_grid: " + std::to_string(cells_per_axis) +
                          " cells per axis does not fit " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
    return GridSpec{width, height, cells_per_axis};
}

enum class CellLabel : std::uint8_t { Quartz, Accessory, Other };

inline char to_code(CellLabel l) {
    switch (l) {
        case CellLabel::Quartz: return 'Q';
        case CellLabel::Accessory: return 'A';
        case CellLabel::Other: return 'O';
    }
    return '?';
}

// One parameter combination for a full image classification.
struct ParamSet {
    int grid = 16;
    double t_nonzero = 0.01;   // max edge-pixel fraction for a quartz cell
    double t_variance = 200.0; // min colour variance for an accessory cell
    CannyParams canny{};
    VarianceMode variance_mode = VarianceMode::Chroma;

    friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

inline void validate(const ParamSet& p) {
    if (p.grid < 1) throw GridTooFine("params: grid must be >= 1");
    if (!(p.t_nonzero >= 0.0 && p.t_nonzero <= 1.0)) throw Error("params: t_nonzero must be in [0, 1]");
    if (!(p.t_variance >= 0.0)) throw Error("params: t_variance must be >= 0");
    validate(p.canny);
}

// Accessory wins when both conditions hold: a cell that is colourful enough
// is accessory regardless of its edge content.
inline CellLabel classify_cell(double edge_fraction, double colour_variance, const ParamSet& p) {
    if (!(edge_fraction >= 0.0 && edge_fraction <= 1.0)) {
        throw Error("classify_cell: edge_fraction must be in [0, 1]");
    }
    if (!(colour_variance >= 0.0)) {
        throw Error("classify_cell: colour_variance must be >= 0");
    }
    if (colour_variance >= p.t_variance) return CellLabel::Accessory;
    if (edge_fraction <= p.t_nonzero) return CellLabel::Quartz;
    return CellLabel::Other;
}

struct CellLabelGrid {
    GridSpec spec;
    std::vector<CellLabel> labels;          // row-major, cells^2 entries
    std::vector<double> edge_fraction;      // per cell
    std::vector<double> colour_variance;    // per cell

    CellLabel at(int cx, int cy) const {
        return labels[static_cast<std::size_t>(cy) * spec.cells + cx];
    }
};

struct MineralPercentages {
    int quartz_cells = 0;
    int accessory_cells = 0;
    int total_cells = 0;
    double quartz_fraction = 0.0;
    double accessory_fraction = 0.0;
};

struct ImageClassification {
    CellLabelGrid cells;
    MineralPercentages percentages;
};

// Feature extraction shared by single-image classification and sweeps: both
// go through these exact functions, so cached sweeps cannot drift from the
// one-shot path.
inline std::vector<double> cell_edge_fractions(const EdgeMap& edges, const GridSpec& spec) {
    if (edges.width != spec.image_width || edges.height != spec.image_height) {
        throw DimensionMismatch("cell_edge_fractions: edge map does not match grid");
    }
    std::vector<double> out(static_cast<std::size_t>(spec.cell_count()));
    for (int cy = 0; cy < spec.cells; ++cy) {
        for (int cx = 0; cx < spec.cells; ++cx) {
            const Rect r = spec.cell_rect(cx, cy);
            std::int64_t n = 0;
            for (int y = r.y; y < r.y + r.h; ++y) {
                const std::uint8_t* row = &edges.mask[static_cast<std::size_t>(y) * edges.width + r.x];
                for (int x = 0; x < r.w; ++x) n += row[x];
            }
            out[static_cast<std::size_t>(cy) * spec.cells + cx] =
                static_cast<double>(n) / static_cast<double>(r.area());
        }
    }
    return out;
}

inline std::vector<double> cell_colour_variances(const RgbImage& img, const GridSpec& spec,
                                                 VarianceMode mode) {
    if (img.width != spec.image_width || img.height != spec.image_height) {
        throw DimensionMismatch("cell_colour_variances: image does not match grid");
    }
    std::vector<double> out(static_cast<std::size_t>(spec.cell_count()));
    for (int cy = 0; cy < spec.cells; ++cy) {
        for (int cx = 0; cx < spec.cells; ++cx) {
            out[static_cast<std::size_t>(cy) * spec.cells + cx] =
                colour_variance(img, spec.cell_rect(cx, cy), mode).value;
        }
    }
    return out;
}

inline ImageClassification label_cells(const GridSpec& spec, std::vector<double> edge_fractions,
                                       std::vector<double> variances, const ParamSet& p) {
    const std::size_t n = static_cast<std::size_t>(spec.cell_count());
    if (edge_fractions.size() != n || variances.size() != n) {
        throw DimensionMismatch("label_cells: feature vectors do not match grid");
    }
    ImageClassification out;
    out.cells.spec = spec;
    out.cells.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CellLabel l = classify_cell(edge_fractions[i], variances[i], p);
        out.cells.labels[i] = l;
        if (l == CellLabel::Quartz) ++out.percentages.quartz_cells;
        if (l == CellLabel::Accessory) ++out.percentages.accessory_cells;
    }
    out.cells.edge_fraction = std::move(edge_fractions);
    out.cells.colour_variance = std::move(variances);
    out.percentages.total_cells = static_cast<int>(n);
    out.percentages.quartz_fraction =
        static_cast<double>(out.percentages.quartz_cells) / static_cast<double>(n);
    out.percentages.accessory_fraction =
        static_cast<double>(out.percentages.accessory_cells) / static_cast<double>(n);
    return out;
}

inline ImageClassification classify_image(const RgbImage& rgb, const GrayImage& gray,
                                          const ParamSet& p) {
    validate(p);
    if (rgb.width != gray.width || rgb.height != gray.height) {
        throw DimensionMismatch("classify_image: colour and gray rasters differ in size");
    }
    const GridSpec spec = make_grid(rgb.width, rgb.height, p.grid);
    const EdgeMap edges = canny(gray, p.canny);
    return label_cells(spec, cell_edge_fractions(edges, spec),
                       cell_colour_variances(rgb, spec, p.variance_mode), p);
}

inline ImageClassification classify_image(const RgbImage& rgb, const ParamSet& p) {
    return classify_image(rgb, to_grayscale(rgb), p);
}

inline nlohmann::ordered_json to_json(const CellLabelGrid& g) {
    nlohmann::ordered_json j;
    j["cells_per_axis"] = g.spec.cells;
    j["image_width"] = g.spec.image_width;
    j["image_height"] = g.spec.image_height;
    std::string codes;
    codes.reserve(g.labels.size());
    for (CellLabel l : g.labels) codes.push_back(to_code(l));
    j["labels"] = codes;  // row-major, one code per cell: Q, A or O
    j["edge_fraction"] = g.edge_fraction;
    j["colour_variance"] = g.colour_variance;
    return j;
}

}  // namespace petroscope
