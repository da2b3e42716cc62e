#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dekg {

// Dense row-major matrix of doubles. Scalars are 1x1, row vectors 1xd.
// Everything the model needs is rank <= 2, so shape is (rows, cols).
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Tensor scalar(double v);
    static Tensor row(std::initializer_list<double> v);
    static Tensor row(const std::vector<double>& v);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rs);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t numel() const { return rows * cols; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    bool is_scalar() const { return rows == 1 && cols == 1; }
    bool finite() const;

    // Value of a 1x1 tensor; throws otherwise.
    double item() const;

    Tensor& operator+=(const Tensor& o);
    Tensor& operator*=(double c);
    bool operator==(const Tensor& o) const = default;
};

}  // namespace dekg
