// Command-line front end: classify one image, sweep a corpus, generate a
// synthetic corpus, or re-derive summaries from a stored report.
//
// Exit codes: 0 success, 1 usage, 2 I/O failure, 3 bad data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "petroscope/canny.hpp"
#include "petroscope/grid.hpp"
#include "petroscope/image_io.hpp"
#include "petroscope/overlay.hpp"
#include "petroscope/qapf.hpp"
#include "petroscope/sweep.hpp"
#include "petroscope/synth.hpp"
#include "petroscope/trace.hpp"
#include "petroscope/version.hpp"

namespace {

namespace ps = petroscope;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;

ps::VarianceMode parse_variance_mode(const std::string& s) {
    if (s == "chroma") return ps::VarianceMode::Chroma;
    if (s == "per-channel-max") return ps::VarianceMode::PerChannelMax;
    return ps::VarianceMode::PerChannelMean;
}

struct ClassifyArgs {
    std::string image;
    int grid = 16;
    double t_nonzero = 0.01;
    double t_variance = 200.0;
    double canny_high = 0.02;
    double canny_sigma = 1.4;
    double low_ratio = 0.4;
    bool bind_thresholds = false;
    std::string variance_mode = "chroma";
    std::string out;
    bool dump_edges = false;
    bool dump_overlay = false;
};

struct SweepArgs {
    std::string manifest;
    std::string plan = "experiment2";
    std::string out = ".";
    bool bind_thresholds = false;
    double t_nonzero = 0.01;
    double canny_sigma = 1.4;
    double low_ratio = 0.4;
    std::string variance_mode = "chroma";
    int workers = 1;
};

struct SynthArgs {
    std::string out;
    std::uint64_t seed = 42;
    int per_class = 10;
};

struct ReportArgs {
    std::string report;
    std::string out = ".";
};

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ps::IoError("cannot create " + path.string());
    out << text;
    if (!out) throw ps::IoError("write failed on " + path.string());
}

void print_best_lines(const ps::SweepReport& report, std::ostream& out) {
    for (ps::RockType rock : {ps::RockType::Granite, ps::RockType::Adamellite,
                              ps::RockType::Tonalite, ps::RockType::Diorite}) {
        try {
            const auto combos = ps::best_params(report, rock);
            const double p = ps::best_precision(report, rock);
            const ps::ParamSet& first = combos.front();
            out << ps::to_string(rock) << " best precision "
                << ps::sweep_detail::fmt_f6(p) << " at " << combos.size()
                << " combo(s); first: grid=" << first.grid
                << " canny_high=" << ps::sweep_detail::fmt_g(first.canny.t_high)
                << " t_nonzero=" << ps::sweep_detail::fmt_g(first.t_nonzero)
                << " t_variance=" << ps::sweep_detail::fmt_g(first.t_variance) << "\n";
        } catch (const ps::NoDefinedPrecision&) {
            out << ps::to_string(rock) << " precision undefined at every combo\n";
        }
    }
}

int run_classify(const ClassifyArgs& a) {
    ps::ParamSet params;
    params.grid = a.grid;
    params.t_nonzero = a.bind_thresholds ? a.canny_high : a.t_nonzero;
    params.t_variance = a.t_variance;
    params.canny.sigma = a.canny_sigma;
    params.canny.t_high = a.canny_high;
    params.canny.low_ratio = a.low_ratio;
    params.variance_mode = parse_variance_mode(a.variance_mode);
    ps::validate(params);

    const ps::RgbImage decoded = ps::decode_file(a.image);
    const ps::RgbImage rgb = ps::to_working_resolution(decoded);
    if (rgb.width != decoded.width) {
        std::cerr << "note: downscaled " << decoded.width << "x" << decoded.height << " to "
                  << rgb.width << "x" << rgb.height << "\n";
    } else if (rgb.width != ps::kWorkingWidth || rgb.height != ps::kWorkingHeight) {
        std::cerr << "warning: analysis expects " << ps::kWorkingWidth << "x"
                  << ps::kWorkingHeight << ", processing native " << rgb.width << "x"
                  << rgb.height << "\n";
    }
    const ps::GrayImage gray = ps::to_grayscale(rgb);

    const ps::ImageClassification ic = ps::classify_image(rgb, gray, params);
    const ps::RockDecision decision =
        ps::classify_rock(100.0 * ic.percentages.quartz_fraction,
                          100.0 * ic.percentages.accessory_fraction);
    std::cout << ps::classify_trace(a.image, ic.cells.spec, params, ic.percentages, decision);

    if (!a.out.empty()) {
        const fs::path dir(a.out);
        fs::create_directories(dir);
        nlohmann::ordered_json j;
        j["generated_by"] = std::string(ps::kGeneratedBy);
        j["source"] = a.image;
        j["params"] = ps::params_to_json(params);
        j["decision"] = ps::to_json(decision);
        j["cells"] = ps::to_json(ic.cells);
        write_text_file(dir / "cells.json", j.dump(2) + "\n");
        if (a.dump_edges) {
            const ps::EdgeMap edges = ps::canny(gray, params.canny);
            ps::write_png_gray1(dir / "edges.png", edges.width, edges.height, edges.mask);
        }
        if (a.dump_overlay) {
            ps::write_png(dir / "overlay.png", ps::render_overlay(rgb, ic.cells));
        }
    }
    return kExitOk;
}

int run_sweep_cmd(const SweepArgs& a) {
    ps::SweepOptions opt;
    opt.bind_thresholds = a.bind_thresholds;
    opt.cell_cutoff = a.t_nonzero;
    opt.variance_mode = parse_variance_mode(a.variance_mode);
    opt.sigma = a.canny_sigma;
    opt.low_ratio = a.low_ratio;
    opt.workers = a.workers;

    ps::ExperimentPlan plan = ps::load_plan(a.plan, opt);
    const fs::path manifest(a.manifest);
    plan.corpus = ps::read_manifest(manifest);
    const ps::SweepReport report = ps::run_sweep(plan, opt, manifest.parent_path());

    const fs::path dir(a.out);
    fs::create_directories(dir);
    {
        std::ostringstream csv;
        ps::write_report_csv(report, csv);
        write_text_file(dir / "report.csv", csv.str());
    }
    {
        std::ostringstream csv;
        ps::write_precision_csv(report, csv);
        write_text_file(dir / "precision.csv", csv.str());
    }
    {
        std::ostringstream js;
        ps::write_summary_json(report, js);
        write_text_file(dir / "summary.json", js.str());
    }

    std::cout << "plan " << report.plan.name << ": " << report.plan.combos.size() << " combos, "
              << report.plan.corpus.size() << " images, " << report.failed_images
              << " failed\n";
    print_best_lines(report, std::cout);
    std::cout << "wrote " << (dir / "report.csv").string() << ", "
              << (dir / "precision.csv").string() << ", " << (dir / "summary.json").string()
              << "\n";
    return report.failed_images == 0 ? kExitOk : kExitData;
}

int run_synth(const SynthArgs& a) {
    const ps::CorpusPaths paths = ps::generate_corpus(a.per_class, a.seed, fs::path(a.out));
    std::cout << "wrote " << paths.images << " images, " << paths.manifest.string() << ", "
              << paths.meta.string() << "\n";
    return kExitOk;
}

int run_report(const ReportArgs& a) {
    const ps::SweepReport report = ps::read_report_csv(a.report);
    const fs::path dir(a.out);
    fs::create_directories(dir);
    {
        std::ostringstream csv;
        ps::write_precision_csv(report, csv);
        write_text_file(dir / "precision.csv", csv.str());
    }
    {
        std::ostringstream js;
        ps::write_summary_json(report, js);
        write_text_file(dir / "summary.json", js.str());
    }
    std::cout << "report: " << report.plan.combos.size() << " combos, "
              << report.plan.corpus.size() << " images, " << report.failed_images << " failed\n";
    print_best_lines(report, std::cout);
    std::cout << "wrote " << (dir / "precision.csv").string() << ", "
              << (dir / "summary.json").string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thin-section classifier for intrusive igneous rocks"};
    app.set_version_flag("--version", std::string(petroscope::kVersion));
    app.set_config("--config");
    app.require_subcommand(1);

    ClassifyArgs ca;
    CLI::App* classify = app.add_subcommand("classify", "classify a single thin-section image");
    classify->add_option("image", ca.image, "PNG or JPEG image")->required();
    classify->add_option("--grid", ca.grid, "cells per axis")->check(CLI::Range(1, 512));
    classify->add_option("--t-nonzero", ca.t_nonzero, "max edge fraction for a quartz cell")
        ->check(CLI::Range(0.0, 1.0));
    classify->add_option("--t-variance", ca.t_variance, "min colour variance for an accessory cell")
        ->check(CLI::NonNegativeNumber);
    classify->add_option("--canny-high", ca.canny_high, "Canny high threshold (fraction of max)")
        ->check(CLI::Range(1e-9, 1.0));
    classify->add_option("--canny-sigma", ca.canny_sigma, "Gaussian blur sigma")
        ->check(CLI::PositiveNumber);
    classify->add_option("--low-ratio", ca.low_ratio, "Canny low/high ratio")
        ->check(CLI::Range(1e-9, 0.999999));
    classify->add_flag("--bind-thresholds", ca.bind_thresholds,
                       "use --canny-high as the cell edge cutoff too");
    classify->add_option("--variance-mode", ca.variance_mode, "colour variance definition")
        ->check(CLI::IsMember({"chroma", "per-channel-max", "per-channel-mean"}));
    classify->add_option("--out", ca.out, "directory for cells.json and dumps");
    classify->add_flag("--dump-edges", ca.dump_edges, "write edges.png (needs --out)");
    classify->add_flag("--dump-overlay", ca.dump_overlay, "write overlay.png (needs --out)");

    SweepArgs sa;
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep over a corpus");
    sweep->add_option("--manifest", sa.manifest, "corpus manifest CSV (path,rock,section)")
        ->required();
    sweep->add_option("--plan", sa.plan, "experiment1, experiment2 or a plan JSON file");
    sweep->add_option("--out", sa.out, "output directory");
    sweep->add_flag("--bind-thresholds", sa.bind_thresholds,
                    "bind the cell edge cutoff to the swept Canny threshold");
    sweep->add_option("--t-nonzero", sa.t_nonzero, "fixed cell edge cutoff when not bound")
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--canny-sigma", sa.canny_sigma, "Gaussian blur sigma")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--low-ratio", sa.low_ratio, "Canny low/high ratio")
        ->check(CLI::Range(1e-9, 0.999999));
    sweep->add_option("--variance-mode", sa.variance_mode, "colour variance definition")
        ->check(CLI::IsMember({"chroma", "per-channel-max", "per-channel-mean"}));
    sweep->add_option("--workers", sa.workers, "worker threads")->check(CLI::Range(1, 256));

    SynthArgs ya;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic labelled corpus");
    synth->add_option("--out", ya.out, "output directory")->required();
    synth->add_option("--seed", ya.seed, "RNG seed");
    synth->add_option("--per-class", ya.per_class, "images per rock class")
        ->check(CLI::Range(1, 10000));

    ReportArgs ra;
    CLI::App* report = app.add_subcommand("report", "re-derive summaries from a report.csv");
    report->add_option("--report", ra.report, "report.csv from a sweep")->required();
    report->add_option("--out", ra.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (classify->parsed()) return run_classify(ca);
        if (sweep->parsed()) return run_sweep_cmd(sa);
        if (synth->parsed()) return run_synth(ya);
        return run_report(ra);
    } catch (const petroscope::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const petroscope::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
