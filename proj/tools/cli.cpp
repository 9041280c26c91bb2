#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kld/baseline.hpp"
#include "kld/detect.hpp"
#include "kld/divergence.hpp"
#include "kld/filter.hpp"
#include "kld/grid.hpp"
#include "kld/render.hpp"
#include "kld/synth.hpp"

namespace kld::cli {

namespace {

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size())
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::runtime_error(std::string("bad ") + what + " entry: '" +
                                     tok + "'");
        }
    }
    if (out.empty())
        throw std::runtime_error(std::string("empty ") + what + " list");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& csv,
                                         const char* what) {
    std::vector<std::size_t> out;
    for (double v : parse_double_list(csv, what)) {
        if (v < 0 || v != std::floor(v))
            throw std::runtime_error(std::string("bad ") + what + " entry: " +
                                     std::to_string(v));
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

Smoothing smoothing_from(const std::string& name, double epsilon,
                         std::size_t sample_count) {
    if (name == "skip")
        return Smoothing::skip();
    if (name == "none")
        return Smoothing::none();
    if (name == "js")
        return Smoothing::jensen_shannon();
    if (name == "epsilon") {
        // default epsilon: a tenth of one sample's worth of mass
        const double eps = epsilon > 0.0
                               ? epsilon
                               : 1.0 / (10.0 * static_cast<double>(sample_count));
        return Smoothing::additive(eps);
    }
    throw std::runtime_error("unknown smoothing '" + name + "'");
}

LogBase log_base_from(const std::string& name) {
    if (name == "e")
        return LogBase::natural;
    if (name == "2")
        return LogBase::base2;
    throw std::runtime_error("unknown log base '" + name + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

struct SynthArgs {
    std::string config_path;
    bool paper = false;
    std::string out_path;
    std::string truth_mask;
    std::string dump_config;
    std::int64_t seed = -1;
};

SynthConfig resolve_config(const std::string& config_path, bool paper,
                           std::int64_t seed) {
    if (paper != config_path.empty())
        throw std::runtime_error(
            "exactly one of --config and --paper-layout is required");
    SynthConfig cfg = paper ? paper_layout() : load_synth_config(config_path);
    if (seed >= 0)
        cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.validate();
    return cfg;
}

void run_synth(const SynthArgs& a) {
    const SynthConfig cfg = resolve_config(a.config_path, a.paper, a.seed);
    const ScanGrid grid = generate_scan(cfg);
    save_grid(grid, a.out_path, format_from_path(a.out_path));
    if (!a.truth_mask.empty()) {
        const FootprintMask mask = footprint_mask(cfg);
        std::vector<std::uint8_t> pixels(mask.cells.size());
        for (std::size_t n = 0; n < mask.cells.size(); ++n)
            pixels[n] = mask.cells[n] == CellKind::hole   ? 255
                        : mask.cells[n] == CellKind::weld ? 128
                                                          : 0;
        write_pgm(a.truth_mask, mask.rows, mask.cols, pixels);
    }
    if (!a.dump_config.empty())
        save_synth_config(cfg, a.dump_config);
}

struct FilterArgs {
    std::string in_path;
    std::string out_path;
    std::size_t l = 60;
    std::size_t w = 1;
    std::size_t k = 67;
    std::size_t bins = 60;
    std::string smoothing = "skip";
    double epsilon = 0.0;
    std::string log_base = "e";
    unsigned threads = 0;
};

FilterConfig filter_config_from(const FilterArgs& a, std::size_t sample_count) {
    FilterConfig cfg;
    cfg.axial_half = a.l;
    cfg.circ_half = a.w;
    cfg.baseline_bins = a.k;
    cfg.local_bins = a.bins;
    cfg.smoothing = smoothing_from(a.smoothing, a.epsilon, sample_count);
    cfg.log_base = log_base_from(a.log_base);
    cfg.threads = a.threads;
    return cfg;
}

void run_filter(const FilterArgs& a) {
    const ScanGrid grid = load_grid(a.in_path, format_from_path(a.in_path));
    const FilterConfig cfg = filter_config_from(a, grid.values().size());
    const Pmf baseline = baseline_from_all(grid, cfg.baseline_bins);
    const KldMap map = local_kld_map(grid, baseline, cfg);
    save_map(map, a.out_path, format_from_path(a.out_path));
    if (map.diagnostics.negative_values || map.diagnostics.infinite_values)
        std::cerr << "note: " << map.diagnostics.negative_values
                  << " negative and " << map.diagnostics.infinite_values
                  << " non-finite divergence values (min "
                  << map.diagnostics.min_value << ")\n";
}

void run_entropy(const FilterArgs& a) {
    const ScanGrid grid = load_grid(a.in_path, format_from_path(a.in_path));
    const FilterConfig cfg = filter_config_from(a, grid.values().size());
    const KldMap map = local_entropy_map(grid, cfg);
    save_map(map, a.out_path, format_from_path(a.out_path));
}

struct DetectArgs {
    std::string in_path;
    std::string report_path;
    std::string csv_path;
    std::string policy = "otsu";
    double sigma_mult = 3.0;
};

void run_detect(const DetectArgs& a) {
    const ScanGrid map = load_grid(a.in_path, format_from_path(a.in_path));
    SegmentPolicy policy;
    if (a.policy == "otsu")
        policy = SegmentPolicy::otsu();
    else if (a.policy == "mean_plus_sigma")
        policy = SegmentPolicy::mean_plus_sigma(a.sigma_mult);
    else
        throw std::runtime_error("unknown policy '" + a.policy + "'");
    const AnomalyReport report =
        segment(map.values(), map.axial_pitch(), map.circ_pitch(),
                map.periodic_circ(), policy);
    write_text_file(a.report_path, report_text(report));
    if (!a.csv_path.empty())
        write_text_file(a.csv_path, report_csv(report));
}

struct SensitivityArgs {
    std::string config_path;
    bool paper = false;
    std::int64_t seed = -1;
    std::string fractions = "0.01,0.02,0.05,0.1";
    std::string out_path;
    std::size_t probe_hole = 0;
    std::size_t probe_l = 7;
    std::size_t probe_w = 1;
    std::size_t k = 67;
    std::size_t bins = 60;
};

void run_sensitivity(const SensitivityArgs& a) {
    const SynthConfig cfg = resolve_config(a.config_path, a.paper, a.seed);
    const std::vector<double> fractions =
        parse_double_list(a.fractions, "fraction");
    ProbeSpec probe;
    probe.hole_index = a.probe_hole;
    probe.axial_half = a.probe_l;
    probe.circ_half = a.probe_w;
    probe.bins = a.bins;
    const auto reports = sensitivity_sweep(cfg, fractions, probe, a.k);
    write_text_file(a.out_path, sensitivity_csv(reports));
}

struct SweepArgs {
    std::string in_path;
    std::string l_list = "10,60,200";
    std::string w_list = "0,1,3";
    std::string out_dir;
    std::size_t k = 67;
    std::size_t bins = 60;
    std::string smoothing = "skip";
    double epsilon = 0.0;
    std::string log_base = "e";
    unsigned threads = 0;
};

void run_sweep(const SweepArgs& a) {
    const ScanGrid grid = load_grid(a.in_path, format_from_path(a.in_path));
    const auto ls = parse_size_list(a.l_list, "l");
    const auto ws = parse_size_list(a.w_list, "w");
    std::filesystem::create_directories(a.out_dir);
    const Pmf baseline = baseline_from_all(grid, a.k);
    for (std::size_t l : ls) {
        for (std::size_t w : ws) {
            FilterConfig cfg;
            cfg.axial_half = l;
            cfg.circ_half = w;
            cfg.baseline_bins = a.k;
            cfg.local_bins = a.bins;
            cfg.smoothing =
                smoothing_from(a.smoothing, a.epsilon, grid.values().size());
            cfg.log_base = log_base_from(a.log_base);
            cfg.threads = a.threads;
            const KldMap map = local_kld_map(grid, baseline, cfg);
            const std::filesystem::path out =
                std::filesystem::path(a.out_dir) /
                ("kld_l" + std::to_string(l) + "_w" + std::to_string(w) + ".csv");
            save_map(map, out, GridFormat::csv);
        }
    }
}

struct RenderArgs {
    std::string in_path;
    std::string out_path;
    std::string palette = "heat";
    std::string scale = "linear";
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
};

void run_render(const RenderArgs& a) {
    const ScanGrid map = load_grid(a.in_path, format_from_path(a.in_path));
    ColorMapSpec spec;
    if (a.palette == "heat")
        spec.palette = Palette::heat;
    else if (a.palette == "gray")
        spec.palette = Palette::grayscale;
    else
        throw std::runtime_error("unknown palette '" + a.palette + "'");
    if (a.scale == "linear")
        spec.scale = ScaleMode::linear;
    else if (a.scale == "rank")
        spec.scale = ScaleMode::rank;
    else
        throw std::runtime_error("unknown scale '" + a.scale + "'");
    if (!std::isnan(a.lo))
        spec.lo = a.lo;
    if (!std::isnan(a.hi))
        spec.hi = a.hi;
    const RenderStats stats = render_map(map.values(), spec, a.out_path);
    if (stats.clamped_infinite)
        std::cerr << "note: clamped " << stats.clamped_infinite
                  << " non-finite values\n";
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Windowed Kullback-Leibler divergence filter for 2D scan grids"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic pipe scan");
    synth->add_option("--config", synth_args.config_path, "Scan configuration file");
    synth->add_flag("--paper-layout", synth_args.paper,
                    "Use the canonical ten-hole layout");
    synth->add_option("--out", synth_args.out_path, "Output grid (.csv or .bin)")
        ->required();
    synth->add_option("--truth-mask", synth_args.truth_mask,
                      "Write the ground-truth footprint mask as PGM");
    synth->add_option("--dump-config", synth_args.dump_config,
                      "Write the effective configuration");
    synth->add_option("--seed", synth_args.seed, "Override the noise seed");
    synth->callback([&] { run_synth(synth_args); });

    FilterArgs filter_args;
    auto* filter =
        app.add_subcommand("filter", "Map each sample to its local KLD value");
    auto add_filter_common = [](CLI::App* cmd, FilterArgs& fa, bool with_baseline) {
        cmd->add_option("--in", fa.in_path, "Input grid")->required();
        cmd->add_option("--out", fa.out_path, "Output map")->required();
        cmd->add_option("--l", fa.l, "Axial window half-size");
        cmd->add_option("--w", fa.w, "Circumferential window half-size");
        if (with_baseline)
            cmd->add_option("--k", fa.k, "Baseline histogram bins");
        cmd->add_option("--bins", fa.bins, "Window histogram bins");
        cmd->add_option("--log-base", fa.log_base, "Logarithm base (e or 2)");
        cmd->add_option("--threads", fa.threads, "Worker threads (0 = auto)");
    };
    add_filter_common(filter, filter_args, true);
    filter->add_option("--smoothing", filter_args.smoothing,
                       "Empty-bin policy: skip, epsilon, none, js");
    filter->add_option("--epsilon", filter_args.epsilon,
                       "Additive smoothing mass (0 = auto)");
    filter->callback([&] { run_filter(filter_args); });

    FilterArgs entropy_args;
    auto* entropy = app.add_subcommand(
        "entropy", "Peer benchmark: local Shannon entropy map");
    add_filter_common(entropy, entropy_args, false);
    entropy->callback([&] { run_entropy(entropy_args); });

    DetectArgs detect_args;
    auto* detect =
        app.add_subcommand("detect", "Segment a map into anomalies and welds");
    detect->add_option("--in", detect_args.in_path, "Input map")->required();
    detect->add_option("--report", detect_args.report_path,
                       "Output key=value report")->required();
    detect->add_option("--csv", detect_args.csv_path, "Optional CSV report");
    detect->add_option("--policy", detect_args.policy,
                       "Threshold policy: otsu or mean_plus_sigma");
    detect->add_option("--sigma-mult", detect_args.sigma_mult,
                       "Multiplier for mean_plus_sigma");
    detect->callback([&] { run_detect(detect_args); });

    SensitivityArgs sens_args;
    auto* sens = app.add_subcommand(
        "sensitivity", "Baseline approximation study over anomaly fractions");
    sens->add_option("--config", sens_args.config_path, "Scan configuration file");
    sens->add_flag("--paper-layout", sens_args.paper,
                   "Use the canonical ten-hole layout");
    sens->add_option("--seed", sens_args.seed, "Override the noise seed");
    sens->add_option("--fractions", sens_args.fractions,
                     "Comma-separated anomaly cell fractions");
    sens->add_option("--out", sens_args.out_path, "Output CSV")->required();
    sens->add_option("--probe-hole", sens_args.probe_hole,
                     "Hole index anchoring the probe window");
    sens->add_option("--probe-l", sens_args.probe_l, "Probe window half rows");
    sens->add_option("--probe-w", sens_args.probe_w, "Probe window half cols");
    sens->add_option("--k", sens_args.k, "Baseline histogram bins");
    sens->add_option("--bins", sens_args.bins, "Probe histogram bins");
    sens->callback([&] { run_sensitivity(sens_args); });

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand(
        "sweep", "Filter one grid under a lattice of window sizes");
    sweep->add_option("--in", sweep_args.in_path, "Input grid")->required();
    sweep->add_option("--l-list", sweep_args.l_list, "Axial half-sizes");
    sweep->add_option("--w-list", sweep_args.w_list, "Circumferential half-sizes");
    sweep->add_option("--out-dir", sweep_args.out_dir, "Output directory")
        ->required();
    sweep->add_option("--k", sweep_args.k, "Baseline histogram bins");
    sweep->add_option("--bins", sweep_args.bins, "Window histogram bins");
    sweep->add_option("--smoothing", sweep_args.smoothing,
                      "Empty-bin policy: skip, epsilon, none, js");
    sweep->add_option("--epsilon", sweep_args.epsilon,
                      "Additive smoothing mass (0 = auto)");
    sweep->add_option("--log-base", sweep_args.log_base, "Logarithm base (e or 2)");
    sweep->add_option("--threads", sweep_args.threads, "Worker threads (0 = auto)");
    sweep->callback([&] { run_sweep(sweep_args); });

    RenderArgs render_args;
    auto* render = app.add_subcommand("render", "Write a map as a PGM/PPM image");
    render->add_option("--in", render_args.in_path, "Input map or grid")
        ->required();
    render->add_option("--out", render_args.out_path, "Output image")->required();
    render->add_option("--palette", render_args.palette, "heat or gray");
    render->add_option("--scale", render_args.scale, "linear or rank");
    render->add_option("--lo", render_args.lo, "Explicit lower bound");
    render->add_option("--hi", render_args.hi, "Explicit upper bound");
    render->callback([&] { run_render(render_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("kldfilter");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace kld::cli
