#include "kld/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kld {

namespace {

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

std::string pnm_header(const char* magic, std::size_t rows, std::size_t cols) {
    return std::string(magic) + "\n" + std::to_string(cols) + " " +
           std::to_string(rows) + "\n255\n";
}

} // namespace

void write_pgm(const std::filesystem::path& path, std::size_t rows,
               std::size_t cols, std::span<const std::uint8_t> pixels) {
    if (pixels.size() != rows * cols)
        throw std::invalid_argument("write_pgm: pixel count mismatch");
    std::string out = pnm_header("P5", rows, cols);
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    write_bytes(path, out);
}

void write_ppm(const std::filesystem::path& path, std::size_t rows,
               std::size_t cols, std::span<const std::uint8_t> rgb) {
    if (rgb.size() != rows * cols * 3)
        throw std::invalid_argument("write_ppm: pixel count mismatch");
    std::string out = pnm_header("P6", rows, cols);
    out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
    write_bytes(path, out);
}

std::array<std::uint8_t, 3> heat_color(std::uint8_t intensity) {
    const double t = static_cast<double>(intensity) / 255.0;
    auto channel = [](double x) {
        return static_cast<std::uint8_t>(
            std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
    };
    return {channel(3.0 * t), channel(3.0 * t - 1.0), channel(3.0 * t - 2.0)};
}

RenderStats render_map(const Field2D& values, const ColorMapSpec& spec,
                       const std::filesystem::path& path) {
    if (spec.lo && spec.hi && !(*spec.lo < *spec.hi))
        throw std::invalid_argument("render_map: need lo < hi");

    RenderStats stats;
    std::vector<std::uint8_t> intensity(values.size(), 0);

    if (spec.scale == ScaleMode::linear) {
        double lo = spec.lo.value_or(std::numeric_limits<double>::infinity());
        double hi = spec.hi.value_or(-std::numeric_limits<double>::infinity());
        if (!spec.lo || !spec.hi) {
            for (double v : values.values) {
                if (!std::isfinite(v))
                    continue;
                if (!spec.lo)
                    lo = std::min(lo, v);
                if (!spec.hi)
                    hi = std::max(hi, v);
            }
        }
        const double span = hi - lo;
        for (std::size_t n = 0; n < values.size(); ++n) {
            const double v = values.values[n];
            double t;
            if (std::isinf(v)) {
                ++stats.clamped_infinite;
                t = v > 0 ? 1.0 : 0.0;
            } else if (!(span > 0.0)) {
                t = 0.0; // constant map renders black
            } else {
                t = std::clamp((v - lo) / span, 0.0, 1.0);
            }
            intensity[n] = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    } else {
        // Dense rank over the distinct finite values.
        std::vector<double> uniq;
        uniq.reserve(values.size());
        for (double v : values.values)
            if (std::isfinite(v))
                uniq.push_back(v);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        const double denom =
            uniq.size() > 1 ? static_cast<double>(uniq.size() - 1) : 1.0;
        for (std::size_t n = 0; n < values.size(); ++n) {
            const double v = values.values[n];
            double t;
            if (std::isinf(v)) {
                ++stats.clamped_infinite;
                t = v > 0 ? 1.0 : 0.0;
            } else if (uniq.size() <= 1) {
                t = 0.0;
            } else {
                const auto it =
                    std::lower_bound(uniq.begin(), uniq.end(), v);
                t = static_cast<double>(it - uniq.begin()) / denom;
            }
            intensity[n] = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    }

    if (spec.palette == Palette::grayscale) {
        write_pgm(path, values.rows, values.cols, intensity);
    } else {
        std::vector<std::uint8_t> rgb(values.size() * 3);
        for (std::size_t n = 0; n < values.size(); ++n) {
            const auto c = heat_color(intensity[n]);
            rgb[3 * n + 0] = c[0];
            rgb[3 * n + 1] = c[1];
            rgb[3 * n + 2] = c[2];
        }
        write_ppm(path, values.rows, values.cols, rgb);
    }
    return stats;
}

} // namespace kld
