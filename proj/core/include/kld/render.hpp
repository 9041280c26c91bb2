#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include "kld/field.hpp"

namespace kld {

enum class Palette { grayscale, heat };
enum class ScaleMode { linear, rank };

struct ColorMapSpec {
    Palette palette = Palette::heat;
    ScaleMode scale = ScaleMode::linear;
    std::optional<double> lo;
    std::optional<double> hi;
};

struct RenderStats {
    std::size_t clamped_infinite = 0;
};

/// One pixel per cell, written as binary PGM (grayscale) or PPM (heat),
/// deterministic bytes. Linear scaling normalizes over [lo, hi] (defaults:
/// the finite min/max); rank scaling maps the sorted unique values evenly
/// onto [0, 255], so any strictly increasing transform of a map renders the
/// identical image. Infinities clamp to the ends and are counted.
RenderStats render_map(const Field2D& values, const ColorMapSpec& spec,
                       const std::filesystem::path& path);

/// Raw binary "P5" writer: header `P5\n<width> <height>\n255\n` + pixels.
void write_pgm(const std::filesystem::path& path, std::size_t rows,
               std::size_t cols, std::span<const std::uint8_t> pixels);

/// Raw binary "P6" writer, 3 bytes per pixel.
void write_ppm(const std::filesystem::path& path, std::size_t rows,
               std::size_t cols, std::span<const std::uint8_t> rgb);

/// 256-entry black-red-yellow-white ramp used by the heat palette:
/// r = min(1, 3t), g = min(1, max(0, 3t-1)), b = min(1, max(0, 3t-2)).
std::array<std::uint8_t, 3> heat_color(std::uint8_t intensity);

} // namespace kld
