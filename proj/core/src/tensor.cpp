#include "dekg/tensor.hpp"

#include <cmath>

#include "dekg/error.hpp"

namespace dekg {

Tensor Tensor::scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
}

Tensor Tensor::row(std::initializer_list<double> v) {
    Tensor t(1, v.size());
    std::size_t i = 0;
    for (double x : v) t.data[i++] = x;
    return t;
}

Tensor Tensor::row(const std::vector<double>& v) {
    Tensor t(1, v.size());
    t.data = v;
    return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rs) {
    Tensor t(rs.size(), rs.size() ? rs.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rs) {
        if (row.size() != t.cols) throw NumericError("from_rows: ragged rows");
        std::size_t c = 0;
        for (double x : row) t.at(r, c++) = x;
        ++r;
    }
    return t;
}

bool Tensor::finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double Tensor::item() const {
    if (!is_scalar()) throw NumericError("item(): tensor is not 1x1");
    return data[0];
}

Tensor& Tensor::operator+=(const Tensor& o) {
    if (!same_shape(o)) throw NumericError("Tensor +=: shape mismatch");
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
}

Tensor& Tensor::operator*=(double c) {
    for (double& x : data) x *= c;
    return *this;
}

}  // namespace dekg
