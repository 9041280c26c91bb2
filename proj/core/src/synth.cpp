#include "kld/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "detail/format.hpp"

namespace kld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t steps_of(double extent, double pitch, const char* what) {
    const double n = extent / pitch;
    const double rounded = std::round(n);
    if (rounded < 1.0 || std::abs(n - rounded) > 1e-9)
        throw std::invalid_argument(std::string("SynthConfig: ") + what +
                                    " must be a positive whole number of pitches");
    return static_cast<std::size_t>(rounded);
}

// Circumferential distance in mm between two angles, shortest way around.
double arc_distance(double deg_a, double deg_b, double mm_per_deg) {
    double d = std::fmod(std::abs(deg_a - deg_b), 360.0);
    if (d > 180.0)
        d = 360.0 - d;
    return d * mm_per_deg;
}

bool hole_contains(const HoleSpec& hole, double axial_mm, double circ_deg,
                   double mm_per_deg) {
    const double da = axial_mm - hole.center_axial;
    const double dc = arc_distance(circ_deg, hole.center_circ, mm_per_deg);
    const double r = hole.diameter / 2;
    return da * da + dc * dc <= r * r;
}

bool weld_contains(const WeldSpec& weld, double axial_mm) {
    return std::abs(axial_mm - weld.center_axial) <= weld.width / 2;
}

// Signed surface offset per cell: +depth inside a hole (surface recedes),
// -depth across the weld band (bead protrudes toward the sensor).
Field2D clean_offsets(const SynthConfig& c) {
    const std::size_t rows = c.grid_rows();
    const std::size_t cols = c.grid_cols();
    const double mmpd = c.mm_per_degree();
    Field2D offsets(rows, cols, 0.0);

    if (c.weld) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double x = static_cast<double>(i) * c.axial_pitch;
            if (weld_contains(*c.weld, x))
                for (std::size_t j = 0; j < cols; ++j)
                    offsets.at(i, j) -= c.weld->depth;
        }
    }

    for (const HoleSpec& hole : c.holes) {
        const double r = hole.diameter / 2;
        const auto i_lo = static_cast<std::size_t>(std::max(
            0.0, std::floor((hole.center_axial - r) / c.axial_pitch)));
        const auto i_hi = std::min<std::size_t>(
            rows - 1, static_cast<std::size_t>(
                          std::ceil((hole.center_axial + r) / c.axial_pitch)));
        const double col_span = r / (mmpd * c.circ_pitch) + 1.0;
        const auto j_center = static_cast<std::ptrdiff_t>(
            std::round(hole.center_circ / c.circ_pitch));
        const auto reach = static_cast<std::ptrdiff_t>(std::ceil(col_span));
        for (std::size_t i = i_lo; i <= i_hi; ++i) {
            const double x = static_cast<double>(i) * c.axial_pitch;
            for (std::ptrdiff_t dj = -reach; dj <= reach; ++dj) {
                const auto cols_s = static_cast<std::ptrdiff_t>(cols);
                const std::size_t j =
                    static_cast<std::size_t>(((j_center + dj) % cols_s + cols_s) %
                                             cols_s);
                const double theta = static_cast<double>(j) * c.circ_pitch;
                if (hole_contains(hole, x, theta, mmpd))
                    offsets.at(i, j) += hole.depth;
            }
        }
    }
    return offsets;
}

} // namespace

double GaussianStream::next() {
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53; // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SynthConfig::grid_rows() const {
    return steps_of(axial_length, axial_pitch, "axial_length");
}

std::size_t SynthConfig::grid_cols() const {
    return steps_of(360.0, circ_pitch, "circumference");
}

double SynthConfig::mm_per_degree() const {
    return std::numbers::pi * pipe_inner_diameter / 360.0;
}

void SynthConfig::validate() const {
    if (pipe_inner_diameter <= 0 || wall_thickness <= 0 || axial_length <= 0 ||
        nominal_standoff <= 0 || quantization <= 0 || axial_pitch <= 0 ||
        circ_pitch <= 0)
        throw std::invalid_argument("SynthConfig: lengths and pitches must be positive");
    if (std::isnan(snr_db))
        throw std::invalid_argument("SynthConfig: snr_db is NaN");
    (void)grid_rows();
    (void)grid_cols();

    const double mmpd = mm_per_degree();
    for (std::size_t a = 0; a < holes.size(); ++a) {
        const HoleSpec& h = holes[a];
        const double r = h.diameter / 2;
        if (h.diameter <= 0)
            throw std::invalid_argument("SynthConfig: hole diameter must be positive");
        if (!(h.depth > 0) || h.depth > wall_thickness)
            throw std::invalid_argument(
                "SynthConfig: hole depth must lie in (0, wall_thickness]");
        if (h.center_axial - r < 0 || h.center_axial + r > axial_length)
            throw std::invalid_argument(
                "SynthConfig: hole extends past the scanned axial extent");
        if (weld && std::abs(h.center_axial - weld->center_axial) <=
                        r + weld->width / 2)
            throw std::invalid_argument(
                "SynthConfig: hole overlaps the welding strip");
        for (std::size_t b = a + 1; b < holes.size(); ++b) {
            const HoleSpec& g = holes[b];
            const double da = h.center_axial - g.center_axial;
            const double dc = arc_distance(h.center_circ, g.center_circ, mmpd);
            const double min_sep = (h.diameter + g.diameter) / 2;
            if (da * da + dc * dc < min_sep * min_sep)
                throw std::invalid_argument("SynthConfig: overlapping holes");
        }
    }
    if (weld && weld->width <= 0)
        throw std::invalid_argument("SynthConfig: weld width must be positive");
    if (weld && !(weld->depth > 0))
        throw std::invalid_argument("SynthConfig: weld depth must be positive");
}

double noise_sigma(const SynthConfig& config) {
    if (std::isinf(config.snr_db))
        return 0.0;
    return config.nominal_standoff * std::pow(10.0, -config.snr_db / 20.0);
}

std::size_t FootprintMask::count(CellKind kind) const {
    return static_cast<std::size_t>(
        std::count(cells.begin(), cells.end(), kind));
}

FootprintMask footprint_mask(const SynthConfig& config) {
    const Field2D offsets = clean_offsets(config);
    FootprintMask mask;
    mask.rows = offsets.rows;
    mask.cols = offsets.cols;
    mask.cells.resize(offsets.size(), CellKind::clean);
    for (std::size_t n = 0; n < offsets.size(); ++n) {
        if (offsets.values[n] > 0)
            mask.cells[n] = CellKind::hole;
        else if (offsets.values[n] < 0)
            mask.cells[n] = CellKind::weld;
    }
    return mask;
}

double anomaly_cell_fraction(const SynthConfig& config) {
    const FootprintMask mask = footprint_mask(config);
    return static_cast<double>(mask.count(CellKind::hole)) /
           static_cast<double>(mask.rows * mask.cols);
}

bool in_hole(const SynthConfig& config, const HoleSpec& hole, std::size_t i,
             std::size_t j) {
    return hole_contains(hole, static_cast<double>(i) * config.axial_pitch,
                         static_cast<double>(j) * config.circ_pitch,
                         config.mm_per_degree());
}

ScanGrid generate_scan(const SynthConfig& config) {
    config.validate();
    Field2D values = clean_offsets(config);
    const double sigma = noise_sigma(config);

    if (sigma > 0.0) {
        GaussianStream noise(config.seed);
        for (double& v : values.values)
            v = quantize_to(config.nominal_standoff + v + sigma * noise.next(),
                            config.quantization);
    } else {
        for (double& v : values.values)
            v = quantize_to(config.nominal_standoff + v, config.quantization);
    }

    return ScanGrid(std::move(values), config.axial_pitch, config.circ_pitch,
                    config.quantization, /*periodic_circ=*/true);
}

SynthConfig paper_layout() {
    // Five axial bands, one through/blind pair per band on opposite sides of
    // the circumference. Bands keep clear of the mid-span weld so that the
    // default 121-row filter window never bridges a hole response into the
    // weld response, and centers sit between sample rows/columns so every
    // hole covers its maximal cell footprint. The 5 mm hole is a through
    // hole: at half wall depth it would sink below the sensor noise floor.
    SynthConfig c;
    c.holes = {
        // through holes, full wall depth
        {100.5, 30.5, 15.0, 2.0},
        {230.5, 102.5, 10.0, 2.0},
        {360.5, 174.5, 5.0, 2.0},
        {640.5, 66.5, 15.0, 2.0},
        {770.5, 138.5, 10.0, 2.0},
        // blind holes, half wall depth
        {100.5, 210.5, 15.0, 1.0},
        {230.5, 282.5, 10.0, 1.0},
        {360.5, 354.5, 10.0, 1.0},
        {640.5, 246.5, 15.0, 1.0},
        {770.5, 318.5, 10.0, 1.0},
    };
    c.weld = WeldSpec{500.0, 10.0, 2.0};
    return c;
}

SynthConfig strip_anomalies(const SynthConfig& config) {
    SynthConfig c = config;
    c.holes.clear();
    c.weld.reset();
    return c;
}

SynthConfig with_filler_holes(const SynthConfig& base, double target_fraction,
                              std::size_t prototype) {
    if (prototype >= base.holes.size())
        throw std::invalid_argument("with_filler_holes: no such prototype hole");
    if (!(target_fraction > 0.0) || target_fraction >= 1.0)
        throw std::invalid_argument("with_filler_holes: fraction must lie in (0, 1)");

    SynthConfig out = base;
    const HoleSpec proto = base.holes[prototype];
    const double r = proto.diameter / 2;
    const double mmpd = base.mm_per_degree();

    const double pitch_ax = 2 * r + 6.0;
    const double pitch_deg = std::ceil((2 * r + 6.0) / mmpd);
    const std::size_t total =
        base.grid_rows() * base.grid_cols();

    auto hole_cells = [&](const HoleSpec& h) {
        SynthConfig probe = strip_anomalies(base);
        probe.holes = {h};
        return footprint_mask(probe).count(CellKind::hole);
    };

    std::size_t covered = 0;
    for (const HoleSpec& h : out.holes)
        covered += hole_cells(h);

    auto collides = [&](const HoleSpec& cand) {
        if (out.weld && std::abs(cand.center_axial - out.weld->center_axial) <=
                            r + out.weld->width / 2 + 1.0)
            return true;
        for (const HoleSpec& h : out.holes) {
            const double da = cand.center_axial - h.center_axial;
            const double dc = arc_distance(cand.center_circ, h.center_circ, mmpd);
            const double sep = (cand.diameter + h.diameter) / 2 + 2.0;
            if (da * da + dc * dc < sep * sep)
                return true;
        }
        return false;
    };

    for (double ax = r + pitch_ax / 2; ax + r <= base.axial_length;
         ax += pitch_ax) {
        for (double deg = 0.0; deg < 360.0; deg += pitch_deg) {
            if (static_cast<double>(covered) >=
                target_fraction * static_cast<double>(total))
                return out;
            HoleSpec cand = proto;
            cand.center_axial = ax;
            cand.center_circ = deg;
            if (collides(cand))
                continue;
            out.holes.push_back(cand);
            covered += hole_cells(cand);
        }
    }
    return out; // sites exhausted; achieved fraction is below the target
}

namespace {

double parse_config_double(const std::string& value, std::size_t line_no) {
    if (value == "inf")
        return kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": bad number '" + value + "'");
    }
}

} // namespace

SynthConfig load_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());

    SynthConfig c;
    c.holes.clear();
    c.weld.reset();

    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": unterminated section header");
            section = line.substr(1, line.size() - 2);
            if (section == "hole")
                c.holes.emplace_back();
            else if (section == "weld")
                c.weld = WeldSpec{};
            else if (section != "pipe" && section != "sensor" && section != "rng")
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        auto trim = [](std::string s) {
            const auto bb = s.find_first_not_of(" \t");
            const auto ee = s.find_last_not_of(" \t");
            return bb == std::string::npos ? std::string()
                                           : s.substr(bb, ee - bb + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto num = [&] { return parse_config_double(value, line_no); };

        bool known = true;
        if (section == "pipe") {
            if (key == "inner_diameter") c.pipe_inner_diameter = num();
            else if (key == "wall_thickness") c.wall_thickness = num();
            else if (key == "axial_length") c.axial_length = num();
            else known = false;
        } else if (section == "sensor") {
            if (key == "nominal_standoff") c.nominal_standoff = num();
            else if (key == "snr_db") c.snr_db = num();
            else if (key == "quantization") c.quantization = num();
            else if (key == "axial_pitch") c.axial_pitch = num();
            else if (key == "circ_pitch") c.circ_pitch = num();
            else known = false;
        } else if (section == "rng") {
            if (key == "seed")
                c.seed = static_cast<std::uint64_t>(std::stoull(value));
            else known = false;
        } else if (section == "weld") {
            if (key == "center_axial") c.weld->center_axial = num();
            else if (key == "width") c.weld->width = num();
            else if (key == "depth") c.weld->depth = num();
            else known = false;
        } else if (section == "hole") {
            if (c.holes.empty())
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": key outside any [hole] section");
            HoleSpec& h = c.holes.back();
            if (key == "center_axial") h.center_axial = num();
            else if (key == "center_circ") h.center_circ = num();
            else if (key == "diameter") h.diameter = num();
            else if (key == "depth") h.depth = num();
            else known = false;
        } else {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": key before any section");
        }
        if (!known)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "' in [" +
                                     section + "]");
    }
    c.validate();
    return c;
}

void save_synth_config(const SynthConfig& config,
                       const std::filesystem::path& path) {
    using detail::format_double;
    std::ostringstream out;
    out << "# kldfilter synthetic scan configuration\n";
    out << "[pipe]\n";
    out << "inner_diameter = " << format_double(config.pipe_inner_diameter) << "\n";
    out << "wall_thickness = " << format_double(config.wall_thickness) << "\n";
    out << "axial_length = " << format_double(config.axial_length) << "\n";
    out << "\n[sensor]\n";
    out << "nominal_standoff = " << format_double(config.nominal_standoff) << "\n";
    out << "snr_db = "
        << (std::isinf(config.snr_db) ? "inf" : format_double(config.snr_db))
        << "\n";
    out << "quantization = " << format_double(config.quantization) << "\n";
    out << "axial_pitch = " << format_double(config.axial_pitch) << "\n";
    out << "circ_pitch = " << format_double(config.circ_pitch) << "\n";
    out << "\n[rng]\n";
    out << "seed = " << config.seed << "\n";
    if (config.weld) {
        out << "\n[weld]\n";
        out << "center_axial = " << format_double(config.weld->center_axial) << "\n";
        out << "width = " << format_double(config.weld->width) << "\n";
        out << "depth = " << format_double(config.weld->depth) << "\n";
    }
    for (const HoleSpec& h : config.holes) {
        out << "\n[hole]\n";
        out << "center_axial = " << format_double(h.center_axial) << "\n";
        out << "center_circ = " << format_double(h.center_circ) << "\n";
        out << "diameter = " << format_double(h.diameter) << "\n";
        out << "depth = " << format_double(h.depth) << "\n";
    }

    std::ofstream file(path);
    if (!file)
        throw std::runtime_error("cannot write config " + path.string());
    file << out.str();
    if (!file)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace kld
