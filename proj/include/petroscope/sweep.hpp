#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "petroscope/canny.hpp"
#include "petroscope/error.hpp"
#include "petroscope/grid.hpp"
#include "petroscope/image_io.hpp"
#include "petroscope/metrics.hpp"
#include "petroscope/qapf.hpp"
#include "petroscope/version.hpp"

namespace petroscope {

struct CorpusEntry {
    std::string path;     // relative to the manifest's directory
    RockType rock{};
    std::string section;
};

struct ExperimentPlan {
    std::string name;
    std::vector<ParamSet> combos;
    std::vector<CorpusEntry> corpus;
};

// Sweep-wide settings. The swept threshold drives the Canny high fraction;
// with bind_thresholds it doubles as the cell edge cutoff, otherwise the
// cutoff stays fixed at cell_cutoff.
struct SweepOptions {
    bool bind_thresholds = false;
    double cell_cutoff = 0.01;
    VarianceMode variance_mode = VarianceMode::Chroma;
    double sigma = 1.4;
    double low_ratio = 0.4;
    int workers = 1;
};

namespace sweep_detail {

inline ParamSet make_combo(int grid, double swept, double t_variance, const SweepOptions& opt) {
    ParamSet p;
    p.grid = grid;
    p.t_nonzero = opt.bind_thresholds ? swept : opt.cell_cutoff;
    p.t_variance = t_variance;
    p.canny.sigma = opt.sigma;
    p.canny.t_high = swept;
    p.canny.low_ratio = opt.low_ratio;
    p.variance_mode = opt.variance_mode;
    return p;
}

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

inline std::string sanitize_csv_field(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace sweep_detail

// Scale study: the coarsest grid carries all three swept thresholds, finer
// grids only the lowest, against the full variance ladder.
inline ExperimentPlan plan_experiment1(const SweepOptions& opt = {}) {
    ExperimentPlan plan;
    plan.name = "experiment1";
    static constexpr std::array<std::pair<int, double>, 6> axes = {{
        {4, 0.01}, {4, 0.02}, {4, 0.03}, {8, 0.01}, {16, 0.01}, {32, 0.01},
    }};
    static constexpr std::array<double, 6> variances = {50, 100, 150, 200, 250, 300};
    for (const auto& [grid, swept] : axes) {
        for (double tv : variances) {
            plan.combos.push_back(sweep_detail::make_combo(grid, swept, tv, opt));
        }
    }
    return plan;
}

// Full factorial over grid, swept threshold and variance threshold.
inline ExperimentPlan plan_experiment2(const SweepOptions& opt = {}) {
    ExperimentPlan plan;
    plan.name = "experiment2";
    static constexpr std::array<int, 4> grids = {4, 8, 16, 32};
    static constexpr std::array<double, 3> swepts = {0.01, 0.02, 0.03};
    static constexpr std::array<double, 3> variances = {100, 200, 300};
    for (int g : grids) {
        for (double s : swepts) {
            for (double tv : variances) {
                plan.combos.push_back(sweep_detail::make_combo(g, s, tv, opt));
            }
        }
    }
    return plan;
}

// Custom plan: {"name": ..., "combos": [{"grid", "canny_high", "t_variance",
// optional "t_nonzero"}]}. Omitted t_nonzero follows the bind rule.
inline ExperimentPlan parse_plan_json(const nlohmann::json& j, const SweepOptions& opt = {}) {
    ExperimentPlan plan;
    try {
        plan.name = j.at("name").get<std::string>();
        for (const auto& c : j.at("combos")) {
            ParamSet p = sweep_detail::make_combo(c.at("grid").get<int>(),
                                                  c.at("canny_high").get<double>(),
                                                  c.at("t_variance").get<double>(), opt);
            if (c.contains("t_nonzero")) p.t_nonzero = c.at("t_nonzero").get<double>();
            validate(p);
            plan.combos.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("plan: ") + e.what());
    }
    if (plan.combos.empty()) throw Error("plan: no combos");
    return plan;
}

inline ExperimentPlan load_plan(const std::string& name_or_path, const SweepOptions& opt = {}) {
    if (name_or_path == "experiment1") return plan_experiment1(opt);
    if (name_or_path == "experiment2") return plan_experiment2(opt);
    std::ifstream in(name_or_path);
    if (!in) throw IoError("cannot open plan " + name_or_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("plan: ") + e.what());
    }
    return parse_plan_json(j, opt);
}

// Manifest CSV: header "path,rock,section", one image per row.
inline std::vector<CorpusEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("manifest: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,rock,section") {
        throw Error("manifest: expected header path,rock,section in " + path.string());
    }
    std::vector<CorpusEntry> entries;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw Error("manifest: malformed row " + std::to_string(lineno));
        }
        CorpusEntry e;
        e.path = line.substr(0, c1);
        const std::string rock = line.substr(c1 + 1, c2 - c1 - 1);
        e.section = line.substr(c2 + 1);
        const auto parsed = parse_rock(rock);
        if (e.path.empty() || !parsed) {
            throw Error("manifest: malformed row " + std::to_string(lineno));
        }
        e.rock = *parsed;
        entries.push_back(std::move(e));
    }
    return entries;
}

// One (image, combo) outcome. A failed image yields one row per combo with
// the error recorded and no decision.
struct SweepRow {
    int image_index = 0;
    int combo_index = 0;
    std::string image;
    std::string section;
    RockType truth{};
    ParamSet params;
    double quartz_pct = 0.0;
    double accessory_pct = 0.0;
    std::optional<RockDecision> decision;
    bool correct = false;
    std::string error;
};

struct SweepReport {
    ExperimentPlan plan;
    SweepOptions options;
    std::vector<SweepRow> rows;              // image-major, combo-minor
    std::vector<PrecisionRecord> records;    // class-major, combo-minor
    std::int64_t failed_images = 0;
};

namespace sweep_detail {

// Evaluates every combo against one image. Stages are cached on their true
// dependencies: suppressed gradients once per image, edge maps per distinct
// Canny threshold, features per distinct grid; labelling goes through the
// same label_cells call as single-image classification.
inline void evaluate_image(const ExperimentPlan& plan, const SweepOptions& opt,
                           const std::filesystem::path& base_dir, int image_index,
                           std::vector<SweepRow>& rows) {
    const CorpusEntry& entry = plan.corpus[static_cast<std::size_t>(image_index)];
    const std::size_t row0 = static_cast<std::size_t>(image_index) * plan.combos.size();
    for (std::size_t c = 0; c < plan.combos.size(); ++c) {
        SweepRow& r = rows[row0 + c];
        r.image_index = image_index;
        r.combo_index = static_cast<int>(c);
        r.image = entry.path;
        r.section = entry.section;
        r.truth = entry.rock;
        r.params = plan.combos[c];
    }
    try {
        const RgbImage rgb = to_working_resolution(decode_file(base_dir / entry.path));
        const GrayImage gray = to_grayscale(rgb);
        const RasterF suppressed = suppressed_magnitudes(gray, opt.sigma);

        std::map<int, GridSpec> grids;
        std::map<int, std::vector<double>> variances;
        std::map<double, EdgeMap> edges;
        std::map<std::pair<double, int>, std::vector<double>> fractions;
        for (const ParamSet& p : plan.combos) {
            if (!grids.count(p.grid)) {
                const GridSpec spec = make_grid(rgb.width, rgb.height, p.grid);
                grids.emplace(p.grid, spec);
                variances.emplace(p.grid, cell_colour_variances(rgb, spec, opt.variance_mode));
            }
            if (!edges.count(p.canny.t_high)) {
                edges.emplace(p.canny.t_high,
                              hysteresis(suppressed, p.canny.t_high, p.canny.low_ratio));
            }
            const auto key = std::make_pair(p.canny.t_high, p.grid);
            if (!fractions.count(key)) {
                fractions.emplace(key, cell_edge_fractions(edges.at(p.canny.t_high),
                                                           grids.at(p.grid)));
            }
        }

        for (std::size_t c = 0; c < plan.combos.size(); ++c) {
            const ParamSet& p = plan.combos[c];
            SweepRow& r = rows[row0 + c];
            const ImageClassification ic =
                label_cells(grids.at(p.grid), fractions.at({p.canny.t_high, p.grid}),
                            variances.at(p.grid), p);
            r.quartz_pct = 100.0 * ic.percentages.quartz_fraction;
            r.accessory_pct = 100.0 * ic.percentages.accessory_fraction;
            r.decision = classify_rock(r.quartz_pct, r.accessory_pct);
            r.correct = r.decision->label && *r.decision->label == entry.rock;
        }
    } catch (const std::exception& e) {
        for (std::size_t c = 0; c < plan.combos.size(); ++c) {
            rows[row0 + c].decision.reset();
            rows[row0 + c].correct = false;
            rows[row0 + c].error = e.what();
        }
    }
}

}  // namespace sweep_detail

// Rebuilds the per-class precision table and failure count from rows; used
// both after a live sweep and when re-deriving summaries from a stored
// report.
inline void compute_precision_records(SweepReport& report) {
    const std::size_t combos = report.plan.combos.size();
    const std::size_t images = report.plan.corpus.size();
    report.records.clear();
    report.failed_images = 0;
    for (std::size_t i = 0; i < images; ++i) {
        if (!report.rows[i * combos].error.empty()) ++report.failed_images;
    }
    for (RockType rock : {RockType::Granite, RockType::Adamellite, RockType::Tonalite,
                          RockType::Diorite}) {
        for (std::size_t c = 0; c < combos; ++c) {
            std::vector<Outcome> outcomes;
            outcomes.reserve(images);
            for (std::size_t i = 0; i < images; ++i) {
                const SweepRow& r = report.rows[i * combos + c];
                if (!r.error.empty()) continue;
                outcomes.emplace_back(r.decision ? r.decision->label : std::nullopt, r.truth);
            }
            PrecisionRecord rec;
            rec.rock_class = rock;
            rec.params = report.plan.combos[c];
            rec.precision = try_precision(tally(outcomes, rock));
            rec.support = static_cast<std::int64_t>(outcomes.size());
            report.records.push_back(std::move(rec));
        }
    }
}

inline SweepReport run_sweep(const ExperimentPlan& plan, const SweepOptions& opt,
                             const std::filesystem::path& base_dir) {
    if (plan.corpus.empty()) throw CorpusEmpty("run_sweep: empty corpus");
    if (plan.combos.empty()) throw Error("run_sweep: no combos");
    for (const ParamSet& p : plan.combos) validate(p);

    SweepReport report;
    report.plan = plan;
    report.options = opt;
    report.rows.resize(plan.corpus.size() * plan.combos.size());

    const int workers = std::clamp(opt.workers, 1,
                                   std::max(1, static_cast<int>(std::thread::hardware_concurrency())));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= static_cast<int>(plan.corpus.size())) break;
            sweep_detail::evaluate_image(plan, opt, base_dir, i, report.rows);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    compute_precision_records(report);
    return report;
}

// Combos achieving the class's best defined precision, ordered by grid,
// Canny threshold, cell cutoff and variance threshold.
inline std::vector<ParamSet> best_params(const SweepReport& report, RockType rock) {
    std::optional<double> best;
    for (const PrecisionRecord& r : report.records) {
        if (r.rock_class != rock || !r.precision) continue;
        if (!best || *r.precision > *best) best = r.precision;
    }
    if (!best) throw NoDefinedPrecision(std::string("best_params: precision undefined for ") +
                                        to_string(rock) + " at every combo");
    std::vector<ParamSet> out;
    for (const PrecisionRecord& r : report.records) {
        if (r.rock_class == rock && r.precision && *r.precision == *best) out.push_back(r.params);
    }
    std::sort(out.begin(), out.end(), [](const ParamSet& a, const ParamSet& b) {
        return std::tie(a.grid, a.canny.t_high, a.t_nonzero, a.t_variance) <
               std::tie(b.grid, b.canny.t_high, b.t_nonzero, b.t_variance);
    });
    return out;
}

inline double best_precision(const SweepReport& report, RockType rock) {
    const std::vector<ParamSet> best = best_params(report, rock);
    for (const PrecisionRecord& r : report.records) {
        if (r.rock_class == rock && r.precision && r.params == best.front()) return *r.precision;
    }
    throw NoDefinedPrecision("best_precision: record vanished");
}

inline void write_report_csv(const SweepReport& report, std::ostream& out) {
    using sweep_detail::fmt_f6;
    using sweep_detail::fmt_g;
    out << "image,section,grid,t_nonzero,t_variance,canny_high,quartz_pct,accessory_pct,"
           "predicted,truth,correct,error\n";
    for (const SweepRow& r : report.rows) {
        out << r.image << ',' << r.section << ',' << r.params.grid << ','
            << fmt_g(r.params.t_nonzero) << ',' << fmt_g(r.params.t_variance) << ','
            << fmt_g(r.params.canny.t_high) << ',';
        if (r.error.empty()) {
            out << fmt_f6(r.quartz_pct) << ',' << fmt_f6(r.accessory_pct) << ','
                << (r.decision && r.decision->label ? to_string(*r.decision->label)
                                                    : "Unclassified");
        } else {
            out << ",,";
        }
        out << ',' << to_string(r.truth) << ',' << (r.correct ? "true" : "false") << ','
            << sweep_detail::sanitize_csv_field(r.error) << '\n';
    }
}

inline void write_precision_csv(const SweepReport& report, std::ostream& out) {
    using sweep_detail::fmt_f6;
    using sweep_detail::fmt_g;
    out << "rock,grid,t_canny_or_nonzero,t_variance,precision,support\n";
    for (const PrecisionRecord& r : report.records) {
        out << to_string(r.rock_class) << ',' << r.params.grid << ',' << fmt_g(r.params.canny.t_high)
            << ',' << fmt_g(r.params.t_variance) << ','
            << (r.precision ? fmt_f6(*r.precision) : "") << ',' << r.support << '\n';
    }
}

inline nlohmann::ordered_json params_to_json(const ParamSet& p) {
    nlohmann::ordered_json j;
    j["grid"] = p.grid;
    j["t_nonzero"] = p.t_nonzero;
    j["t_variance"] = p.t_variance;
    j["canny_high"] = p.canny.t_high;
    j["canny_sigma"] = p.canny.sigma;
    j["canny_low_ratio"] = p.canny.low_ratio;
    j["variance_mode"] = to_string(p.variance_mode);
    return j;
}

inline nlohmann::ordered_json summary_json(const SweepReport& report) {
    nlohmann::ordered_json j;
    j["generated_by"] = std::string(kGeneratedBy);
    j["plan"] = report.plan.name;
    j["images"] = report.plan.corpus.size();
    j["combos"] = report.plan.combos.size();
    j["failed_images"] = report.failed_images;
    j["bind_thresholds"] = report.options.bind_thresholds;
    j["variance_mode"] = to_string(report.options.variance_mode);

    nlohmann::ordered_json best = nlohmann::ordered_json::object();
    for (RockType rock : {RockType::Granite, RockType::Adamellite, RockType::Tonalite,
                          RockType::Diorite}) {
        try {
            const std::vector<ParamSet> params = best_params(report, rock);
            nlohmann::ordered_json entry;
            entry["precision"] = best_precision(report, rock);
            nlohmann::ordered_json combos = nlohmann::ordered_json::array();
            for (const ParamSet& p : params) combos.push_back(params_to_json(p));
            entry["combos"] = combos;
            best[to_string(rock)] = entry;
        } catch (const NoDefinedPrecision&) {
            best[to_string(rock)] = nullptr;
        }
    }
    j["best_params"] = best;

    nlohmann::ordered_json means = nlohmann::ordered_json::object();
    for (const auto& g : average_precision_by_class(report.records)) {
        nlohmann::ordered_json entry;
        entry["mean_precision"] = g.defined_count > 0 ? nlohmann::ordered_json(g.mean_precision)
                                                      : nlohmann::ordered_json(nullptr);
        entry["defined_combos"] = g.defined_count;
        entry["undefined_combos"] = g.undefined_count;
        means[to_string(g.key)] = entry;
    }
    j["class_precision"] = means;
    return j;
}

inline void write_summary_json(const SweepReport& report, std::ostream& out) {
    out << summary_json(report).dump(2) << "\n";
}

// Reads a report.csv back into a SweepReport so summaries can be re-derived
// without the corpus. The combo list is inferred from the first image's row
// block and every later block must repeat it. Canny sigma and low ratio are
// not stored in the CSV, so reconstructed params carry defaults for them.
inline SweepReport read_report_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("report: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "image,section,grid,t_nonzero,t_variance,canny_high,quartz_pct,accessory_pct,"
                "predicted,truth,correct,error") {
        throw Error("report: unexpected header in " + path.string());
    }

    std::vector<SweepRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t c = line.find(',', start);
            if (c == std::string::npos) {
                f.push_back(line.substr(start));
                break;
            }
            f.push_back(line.substr(start, c - start));
            start = c + 1;
        }
        if (f.size() != 12) throw Error("report: malformed row " + std::to_string(lineno));
        SweepRow r;
        r.image = f[0];
        r.section = f[1];
        try {
            r.params.grid = std::stoi(f[2]);
            r.params.t_nonzero = std::stod(f[3]);
            r.params.t_variance = std::stod(f[4]);
            r.params.canny.t_high = std::stod(f[5]);
        } catch (const std::exception&) {
            throw Error("report: malformed row " + std::to_string(lineno));
        }
        const auto truth = parse_rock(f[9]);
        if (!truth) throw Error("report: unknown rock in row " + std::to_string(lineno));
        r.truth = *truth;
        r.error = f[11];
        if (r.error.empty()) {
            try {
                r.quartz_pct = std::stod(f[6]);
                r.accessory_pct = std::stod(f[7]);
            } catch (const std::exception&) {
                throw Error("report: malformed row " + std::to_string(lineno));
            }
            RockDecision d;
            d.quartz_pct = r.quartz_pct;
            d.accessory_pct = r.accessory_pct;
            d.label = parse_rock(f[8]);
            if (d.label) {
                d.matched.push_back(*d.label);
                d.nearest = d.label;
            }
            r.decision = d;
        }
        r.correct = f[10] == "true";
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw Error("report: no rows in " + path.string());

    SweepReport report;
    report.plan.name = "report";
    std::size_t combos = 0;
    while (combos < rows.size() && rows[combos].image == rows[0].image &&
           rows[combos].section == rows[0].section) {
        ++combos;
    }
    if (combos == 0 || rows.size() % combos != 0) {
        throw Error("report: rows do not form image-major combo blocks");
    }
    for (std::size_t c = 0; c < combos; ++c) report.plan.combos.push_back(rows[c].params);
    const std::size_t images = rows.size() / combos;
    for (std::size_t i = 0; i < images; ++i) {
        const SweepRow& first = rows[i * combos];
        for (std::size_t c = 0; c < combos; ++c) {
            SweepRow& r = rows[i * combos + c];
            if (!(r.params == report.plan.combos[c]) || r.image != first.image) {
                throw Error("report: combo blocks are inconsistent across images");
            }
            r.image_index = static_cast<int>(i);
            r.combo_index = static_cast<int>(c);
        }
        report.plan.corpus.push_back(CorpusEntry{first.image, first.truth, first.section});
    }
    report.rows = std::move(rows);
    compute_precision_records(report);
    return report;
}

}  // namespace petroscope
