#pragma once

// Small dense matrices over ring-like value types (UnramElem, TruncSeries).
// Entries carry their own context; zero_like()/one_like() provide the ring
// constants.

#include "wachlab/big.hpp"

#include <vector>

namespace wachlab {

template <class T>
class Mat {
  public:
    int rows = 0, cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(int r, int c, const T& fill) : rows(r), cols(c), data(r * c, fill) {}

    T& at(int i, int j) { return data[i * cols + j]; }
    const T& at(int i, int j) const { return data[i * cols + j]; }

    static Mat zero(int r, int c, const T& model) { return Mat(r, c, model.zero_like()); }
    static Mat identity(int n, const T& model) {
        Mat m = zero(n, n, model);
        for (int i = 0; i < n; ++i) m.at(i, i) = model.one_like();
        return m;
    }

    Mat zero_like() const { return zero(rows, cols, data[0]); }

    friend Mat operator+(const Mat& a, const Mat& b) {
        Mat r = a;
        for (size_t i = 0; i < r.data.size(); ++i) r.data[i] = a.data[i] + b.data[i];
        return r;
    }
    friend Mat operator-(const Mat& a, const Mat& b) {
        Mat r = a;
        for (size_t i = 0; i < r.data.size(); ++i) r.data[i] = a.data[i] - b.data[i];
        return r;
    }
    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols != b.rows) throw input_error("Mat: dimension mismatch");
        Mat r = zero(a.rows, b.cols, a.data[0]);
        for (int i = 0; i < a.rows; ++i)
            for (int k = 0; k < a.cols; ++k) {
                const T& aik = a.at(i, k);
                for (int j = 0; j < b.cols; ++j) r.at(i, j) += aik * b.at(k, j);
            }
        return r;
    }
    friend Mat operator*(const Mat& a, const T& s) {
        Mat r = a;
        for (auto& x : r.data) x = x * s;
        return r;
    }
    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
    }
    friend bool operator!=(const Mat& a, const Mat& b) { return !(a == b); }

    Mat transpose() const {
        Mat r(cols, rows, data[0]);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
        return r;
    }

    template <class F>
    auto map(F&& fn) const -> Mat<decltype(fn(data[0]))> {
        Mat<decltype(fn(data[0]))> r(rows, cols, fn(data[0]));
        for (int i = 0; i < rows * cols; ++i) r.data[i] = fn(data[i]);
        return r;
    }

    bool is_zero() const {
        for (const auto& x : data)
            if (!x.is_zero()) return false;
        return true;
    }
};

template <class T>
Mat<T> minor_of(const Mat<T>& m, int di, int dj) {
    Mat<T> r(m.rows - 1, m.cols - 1, m.data[0]);
    for (int i = 0, ri = 0; i < m.rows; ++i) {
        if (i == di) continue;
        for (int j = 0, rj = 0; j < m.cols; ++j) {
            if (j == dj) continue;
            r.at(ri, rj) = m.at(i, j);
            ++rj;
        }
        ++ri;
    }
    return r;
}

template <class T>
T det(const Mat<T>& m) {
    if (m.rows != m.cols) throw input_error("det: square matrix required");
    if (m.rows == 1) return m.at(0, 0);
    if (m.rows == 2) return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
    T acc = m.data[0].zero_like();
    for (int j = 0; j < m.cols; ++j) {
        T term = m.at(0, j) * det(minor_of(m, 0, j));
        if (j % 2 == 0)
            acc += term;
        else
            acc -= term;
    }
    return acc;
}

// adj(m) with m * adj(m) = det(m) * Id.
template <class T>
Mat<T> adjugate(const Mat<T>& m) {
    if (m.rows != m.cols) throw input_error("adjugate: square matrix required");
    const int n = m.rows;
    if (n == 1) {
        Mat<T> r(1, 1, m.data[0].one_like());
        return r;
    }
    Mat<T> r(n, n, m.data[0]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            T c = det(minor_of(m, i, j));
            if ((i + j) % 2 == 1) c = m.data[0].zero_like() - c;
            r.at(j, i) = c;
        }
    return r;
}

template <class T>
Mat<T> kron(const Mat<T>& a, const Mat<T>& b) {
    Mat<T> r(a.rows * b.rows, a.cols * b.cols, a.data[0].zero_like());
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j)
            for (int k = 0; k < b.rows; ++k)
                for (int l = 0; l < b.cols; ++l) r.at(i * b.rows + k, j * b.cols + l) = a.at(i, j) * b.at(k, l);
    return r;
}

template <class T>
Mat<T> block_diag(const Mat<T>& a, const Mat<T>& b) {
    Mat<T> r(a.rows + b.rows, a.cols + b.cols, a.data[0].zero_like());
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) r.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) r.at(a.rows + i, a.cols + j) = b.at(i, j);
    return r;
}

}  // namespace wachlab
