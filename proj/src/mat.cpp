#include "sanex/mat.hpp"

#include <cmath>
#include <stdexcept>

namespace sanex {

namespace {
void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

Mat::Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
    require(r >= 0 && c >= 0, "Mat: negative dimension");
}

Mat::Mat(int r, int c, std::initializer_list<double> vals) : Mat(r, c) {
    require(vals.size() == data.size(), "Mat: initializer size mismatch");
    std::size_t i = 0;
    for (double v : vals) data[i++] = v;
}

Mat Mat::column(std::initializer_list<double> vals) {
    Mat m(static_cast<int>(vals.size()), 1);
    std::size_t i = 0;
    for (double v : vals) m.data[i++] = v;
    return m;
}

void Mat::fill(double v) {
    for (double& x : data) x = v;
}

Mat matmul(const Mat& a, const Mat& b) {
    require(a.cols == b.rows, "matmul: inner dimension mismatch");
    Mat out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Mat transpose(const Mat& a) {
    Mat out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

Mat add(const Mat& a, const Mat& b) {
    require(a.same_shape(b), "add: shape mismatch");
    Mat out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Mat sub(const Mat& a, const Mat& b) {
    require(a.same_shape(b), "sub: shape mismatch");
    Mat out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Mat hadamard(const Mat& a, const Mat& b) {
    require(a.same_shape(b), "hadamard: shape mismatch");
    Mat out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
    return out;
}

Mat scale(const Mat& a, double s) {
    Mat out = a;
    for (double& x : out.data) x *= s;
    return out;
}

Mat relu(const Mat& a) {
    Mat out = a;
    for (double& x : out.data)
        if (x < 0.0) x = 0.0;
    return out;
}

void axpy(Mat& a, double s, const Mat& b) {
    require(a.same_shape(b), "axpy: shape mismatch");
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
}

double dot(const Mat& a, const Mat& b) {
    require(a.same_shape(b), "dot: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

Mat concat_rows(const Mat& a, const Mat& b) {
    require(a.cols == 1 && b.cols == 1, "concat_rows: column vectors expected");
    Mat out(a.rows + b.rows, 1);
    for (int i = 0; i < a.rows; ++i) out(i, 0) = a(i, 0);
    for (int i = 0; i < b.rows; ++i) out(a.rows + i, 0) = b(i, 0);
    return out;
}

void check_finite(const Mat& m, const std::string& what) {
    for (double x : m.data)
        if (!std::isfinite(x)) throw std::runtime_error("non-finite value in " + what);
}

}  // namespace sanex
