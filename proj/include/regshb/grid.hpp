#pragma once

#include <cstddef>

namespace regshb {

// Row-major grid descriptor. A 1D signal of length n is {1, n}.
struct GridShape {
    std::size_t rows = 1;
    std::size_t cols = 1;

    std::size_t size() const { return rows * cols; }
    bool is_2d() const { return rows > 1 && cols > 1; }

    friend bool operator==(const GridShape& a, const GridShape& b) {
        return a.rows == b.rows && a.cols == b.cols;
    }
};

}  // namespace regshb
