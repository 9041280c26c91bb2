#include "kld/grid.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "detail/format.hpp"

namespace kld {

namespace {

using detail::format_double;

// Number of fixed decimals that represents every lattice point of q exactly
// in text (1 for q = 0.1). Zero quantization means "not quantized"; cells are
// then written shortest-round-trip instead.
int decimals_for(double q) {
    for (int d = 1; d <= 12; ++d) {
        const double scaled = q * std::pow(10.0, d);
        if (std::abs(scaled - std::round(scaled)) < 1e-9 * std::max(1.0, scaled))
            return d;
    }
    return 12;
}

std::string format_cell(double v, int decimals) {
    if (decimals < 0)
        return format_double(v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

[[noreturn]] void fail(GridParseError::Kind kind, const std::string& msg) {
    throw GridParseError(kind, msg);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& tok, GridParseError::Kind kind,
                    const std::string& where) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    double v = 0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        fail(kind, "not a number at " + where + ": '" + tok + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& where) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    std::uint64_t v = 0;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        fail(GridParseError::Kind::malformed_header,
             "not a positive integer in header field " + where + ": '" + tok + "'");
    return v;
}

constexpr char kBinaryMagic[4] = {'K', 'L', 'D', 'G'};
constexpr std::uint8_t kBinaryVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

double get_f64(const unsigned char* p) {
    return std::bit_cast<double>(get_u64(p));
}

ScanGrid load_grid_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        fail(GridParseError::Kind::io, "cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line))
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": empty file");

    const auto head = split_csv(line);
    if (head.size() != 6)
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": header must hold 6 fields, got " +
                 std::to_string(head.size()));

    const std::uint64_t rows = parse_u64(head[0], "rows");
    const std::uint64_t cols = parse_u64(head[1], "cols");
    const double axial_pitch =
        parse_double(head[2], GridParseError::Kind::malformed_header, "header axial_pitch");
    const double circ_pitch =
        parse_double(head[3], GridParseError::Kind::malformed_header, "header circ_pitch");
    const double quantization =
        parse_double(head[4], GridParseError::Kind::malformed_header, "header quantization");
    bool periodic = false;
    if (head[5] == "true")
        periodic = true;
    else if (head[5] == "false")
        periodic = false;
    else
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": periodic flag must be true/false, got '" + head[5] + "'");
    if (rows == 0 || cols == 0)
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": grid dimensions must be positive");

    Field2D field(rows, cols);
    for (std::uint64_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            fail(GridParseError::Kind::ragged_row,
                 path.string() + ": expected " + std::to_string(rows) +
                     " data rows, file ends after row " + std::to_string(i));
        const auto cells = split_csv(line);
        if (cells.size() != cols)
            fail(GridParseError::Kind::ragged_row,
                 path.string() + ": row " + std::to_string(i + 1) + " holds " +
                     std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(cols));
        for (std::uint64_t j = 0; j < cols; ++j) {
            const std::string where = "row " + std::to_string(i + 1) + ", column " +
                                      std::to_string(j + 1);
            field.at(i, j) = parse_double(
                cells[j], GridParseError::Kind::non_numeric_cell, where);
        }
    }
    try {
        return ScanGrid(std::move(field), axial_pitch, circ_pitch, quantization,
                        periodic);
    } catch (const GridParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(GridParseError::Kind::malformed_header, path.string() + ": " + e.what());
    }
}

ScanGrid load_grid_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(GridParseError::Kind::io, "cannot open " + path.string());
    std::string raw((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

    constexpr std::size_t header_size = 4 + 1 + 6 * 8;
    if (raw.size() < header_size ||
        std::memcmp(raw.data(), kBinaryMagic, 4) != 0)
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": not a KLDG binary grid");
    if (static_cast<std::uint8_t>(raw[4]) != kBinaryVersion)
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": unsupported KLDG version");

    const auto* p = reinterpret_cast<const unsigned char*>(raw.data()) + 5;
    const std::uint64_t rows = get_u64(p);
    const std::uint64_t cols = get_u64(p + 8);
    const double axial_pitch = get_f64(p + 16);
    const double circ_pitch = get_f64(p + 24);
    const double quantization = get_f64(p + 32);
    const std::uint64_t periodic = get_u64(p + 40);

    if (rows == 0 || cols == 0 || periodic > 1)
        fail(GridParseError::Kind::malformed_header,
             path.string() + ": bad binary header");
    const std::size_t expect = header_size + rows * cols * 8;
    if (raw.size() != expect)
        fail(GridParseError::Kind::ragged_row,
             path.string() + ": payload holds " +
                 std::to_string((raw.size() - header_size) / 8) +
                 " values, expected " + std::to_string(rows * cols));

    Field2D field(rows, cols);
    const unsigned char* cell = p + 48;
    for (std::size_t n = 0; n < rows * cols; ++n, cell += 8)
        field.values[n] = get_f64(cell);

    try {
        return ScanGrid(std::move(field), axial_pitch, circ_pitch, quantization,
                        periodic == 1);
    } catch (const std::exception& e) {
        fail(GridParseError::Kind::malformed_header, path.string() + ": " + e.what());
    }
}

void write_all(const std::filesystem::path& path, const std::string& bytes,
               bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace

double quantize_to(double v, double q) {
    const double steps = std::round(v / q);
    const double inv = std::round(1.0 / q);
    if (inv > 0 && std::abs(1.0 / q - inv) < 1e-9)
        return steps / inv;
    return steps * q;
}

ScanGrid::ScanGrid(Field2D values, double axial_pitch, double circ_pitch,
                   double quantization, bool periodic_circ)
    : values_(std::move(values)),
      axial_pitch_(axial_pitch),
      circ_pitch_(circ_pitch),
      quantization_(quantization),
      periodic_circ_(periodic_circ) {
    if (values_.rows == 0 || values_.cols == 0)
        throw std::invalid_argument("ScanGrid: empty grid");
    if (axial_pitch_ <= 0 || circ_pitch_ <= 0)
        throw std::invalid_argument("ScanGrid: pitches must be positive");
    if (quantization_ < 0)
        throw std::invalid_argument("ScanGrid: negative quantization");
    if (quantization_ > 0) {
        for (std::size_t i = 0; i < values_.rows; ++i) {
            for (std::size_t j = 0; j < values_.cols; ++j) {
                double& v = values_.at(i, j);
                const double snapped = quantize_to(v, quantization_);
                if (std::abs(v - snapped) > 1e-9)
                    throw GridParseError(
                        GridParseError::Kind::off_lattice_value,
                        "value off the quantization lattice at row " +
                            std::to_string(i + 1) + ", column " +
                            std::to_string(j + 1) + ": " + format_double(v));
                v = snapped;
            }
        }
    }
}

GridFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".bin" ? GridFormat::binary : GridFormat::csv;
}

ScanGrid load_grid(const std::filesystem::path& path, GridFormat format) {
    return format == GridFormat::csv ? load_grid_csv(path)
                                     : load_grid_binary(path);
}

void save_grid(const ScanGrid& grid, const std::filesystem::path& path,
               GridFormat format) {
    if (format == GridFormat::csv) {
        std::string out;
        out.reserve(grid.rows() * grid.cols() * 8 + 64);
        out += std::to_string(grid.rows());
        out += ',';
        out += std::to_string(grid.cols());
        out += ',';
        out += format_double(grid.axial_pitch());
        out += ',';
        out += format_double(grid.circ_pitch());
        out += ',';
        out += format_double(grid.quantization());
        out += ',';
        out += grid.periodic_circ() ? "true" : "false";
        out += '\n';
        const int decimals =
            grid.quantization() > 0 ? decimals_for(grid.quantization()) : -1;
        for (std::size_t i = 0; i < grid.rows(); ++i) {
            for (std::size_t j = 0; j < grid.cols(); ++j) {
                if (j) out += ',';
                out += format_cell(grid.at(i, j), decimals);
            }
            out += '\n';
        }
        write_all(path, out, false);
    } else {
        std::string out;
        out.reserve(grid.rows() * grid.cols() * 8 + 64);
        out.append(kBinaryMagic, 4);
        out += static_cast<char>(kBinaryVersion);
        put_u64(out, grid.rows());
        put_u64(out, grid.cols());
        put_f64(out, grid.axial_pitch());
        put_f64(out, grid.circ_pitch());
        put_f64(out, grid.quantization());
        put_u64(out, grid.periodic_circ() ? 1 : 0);
        for (double v : grid.values().values)
            put_f64(out, v);
        write_all(path, out, true);
    }
}

void window_subset_into(const ScanGrid& grid, std::size_t i, std::size_t j,
                        std::size_t l, std::size_t w, std::vector<double>& out) {
    out.clear();
    const std::size_t rows = grid.rows();
    const std::size_t cols = grid.cols();
    if (i >= rows || j >= cols)
        throw std::out_of_range("window_subset: center outside the grid");

    const std::size_t i0 = i > l ? i - l : 0;
    const std::size_t i1 = std::min(rows - 1, i + l);

    if (grid.periodic_circ()) {
        // Wrap in j, never duplicating a column when the window exceeds the
        // circumference.
        const std::size_t span = std::min(2 * w + 1, cols);
        const std::size_t half = (span - 1) / 2;
        const std::size_t start = (j + cols - half) % cols;
        for (std::size_t ii = i0; ii <= i1; ++ii) {
            std::size_t jj = start;
            for (std::size_t n = 0; n < span; ++n) {
                out.push_back(grid.at(ii, jj));
                jj = (jj + 1) % cols;
            }
        }
    } else {
        const std::size_t j0 = j > w ? j - w : 0;
        const std::size_t j1 = std::min(cols - 1, j + w);
        for (std::size_t ii = i0; ii <= i1; ++ii)
            for (std::size_t jj = j0; jj <= j1; ++jj)
                out.push_back(grid.at(ii, jj));
    }
}

std::vector<double> window_subset(const ScanGrid& grid, std::size_t i,
                                  std::size_t j, std::size_t l, std::size_t w) {
    std::vector<double> out;
    window_subset_into(grid, i, j, l, w, out);
    return out;
}

} // namespace kld
