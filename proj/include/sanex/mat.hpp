#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace sanex {

// Dense row-major matrix of doubles. The single numeric carrier for
// observations, activations, weights and gradients.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c);
    Mat(int r, int c, std::initializer_list<double> vals);

    static Mat column(std::initializer_list<double> vals);

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    std::size_t size() const { return data.size(); }
    void fill(double v);
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);
Mat sub(const Mat& a, const Mat& b);
Mat hadamard(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
Mat relu(const Mat& a);
// a += s * b
void axpy(Mat& a, double s, const Mat& b);
double dot(const Mat& a, const Mat& b);
Mat concat_rows(const Mat& a, const Mat& b);

// Throws std::runtime_error naming `what` if any entry is NaN/Inf.
void check_finite(const Mat& m, const std::string& what);

}  // namespace sanex
