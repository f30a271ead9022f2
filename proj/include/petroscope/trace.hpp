#pragma once

#include <cstdio>
#include <string>

#include "petroscope/grid.hpp"
#include "petroscope/qapf.hpp"

namespace petroscope {

namespace trace_detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string fmt_f6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace trace_detail

// Human-readable run log for a single image, one decision per line. The
// fractions are printed as they were computed, so the log doubles as a
// regression fixture. Lines use LF endings only.
inline std::string classify_trace(const std::string& source, const GridSpec& spec,
                                  const ParamSet& params, const MineralPercentages& pct,
                                  const RockDecision& decision) {
    using trace_detail::fmt_f6;
    using trace_detail::fmt_g;
    const std::string g = std::to_string(params.grid);
    std::string out;
    out += "Sample of " + g + "x" + g + " analysis result\n";
    out += "Opening " + source + "\n";
    out += "Params = " + g + "x" + g + "\n";
    out += "Image resolution " + std::to_string(spec.image_width) + " x " +
           std::to_string(spec.image_height) + "\n";
    out += "Cell resolution " + std::to_string(spec.base_cell_width()) + "x" +
           std::to_string(spec.base_cell_height()) + "\n";
    out += "Number of cells " + std::to_string(spec.cell_count()) + "\n";
    out += "t nonzero " + fmt_g(params.t_nonzero) + "\n";
    out += "Accessory Minerals " + std::to_string(pct.accessory_cells) + "/" +
           std::to_string(pct.total_cells) + " (" + fmt_f6(pct.accessory_fraction) + ")\n";
    out += "t variance " + fmt_g(params.t_variance) + "\n";
    out += "Quartz " + std::to_string(pct.quartz_cells) + "/" + std::to_string(pct.total_cells) +
           " (" + fmt_f6(pct.quartz_fraction) + ")\n";
    if (decision.label) {
        out += std::string("It's a ") + to_string(*decision.label) + "!\n";
    } else {
        out += std::string("Unclassified (nearest: ") +
               (decision.nearest ? to_string(*decision.nearest) : "none") + ")\n";
    }
    return out;
}

}  // namespace petroscope
