#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kld {

/// Dense row-major 2D array of doubles. Rows run along the pipe axis,
/// columns around the circumference.
struct Field2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Field2D() = default;
    Field2D(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {
        if (r == 0 || c == 0)
            throw std::invalid_argument("Field2D: dimensions must be positive");
    }

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    std::size_t size() const { return values.size(); }

    bool same_shape(const Field2D& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

} // namespace kld
