#pragma once

// Dense matrices over a field handle (or, for multiplication and powers,
// over a commutative ring handle). Row reduction, kernels and solving are
// restricted to fields; they are used both over F_q and over the component
// fields of quotient rings A/(a).

#include "common.hpp"

#include <optional>
#include <vector>

namespace dkt {

template <class F>
class Matrix {
  public:
    using Elem = typename F::Elem;

    Matrix(const F& field, size_t rows, size_t cols)
        : field_(field), rows_(rows), cols_(cols), d_(rows * cols, field.zero()) {}

    static Matrix identity(const F& field, size_t n) {
        Matrix m(field, n, n);
        for (size_t i = 0; i < n; ++i) m.at(i, i) = field.one();
        return m;
    }

    const F& field() const { return field_; }
    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    Elem& at(size_t r, size_t c) { return d_[r * cols_ + c]; }
    const Elem& at(size_t r, size_t c) const { return d_[r * cols_ + c]; }

    bool operator==(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) return false;
        for (size_t i = 0; i < d_.size(); ++i)
            if (!field_.eq(d_[i], o.d_[i])) return false;
        return true;
    }
    bool operator!=(const Matrix& o) const { return !(*this == o); }

    Matrix operator+(const Matrix& o) const {
        require_shape(o, rows_, cols_);
        Matrix r = *this;
        for (size_t i = 0; i < d_.size(); ++i) r.d_[i] = field_.add(d_[i], o.d_[i]);
        return r;
    }

    Matrix operator-(const Matrix& o) const {
        require_shape(o, rows_, cols_);
        Matrix r = *this;
        for (size_t i = 0; i < d_.size(); ++i) r.d_[i] = field_.sub(d_[i], o.d_[i]);
        return r;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw domain_error("matrix product shape mismatch");
        Matrix r(field_, rows_, o.cols_);
        for (size_t i = 0; i < rows_; ++i) {
            for (size_t k = 0; k < cols_; ++k) {
                const Elem& a = at(i, k);
                if (field_.is_zero(a)) continue;
                for (size_t j = 0; j < o.cols_; ++j)
                    r.at(i, j) = field_.add(r.at(i, j), field_.mul(a, o.at(k, j)));
            }
        }
        return r;
    }

    std::vector<Elem> apply(const std::vector<Elem>& v) const {
        if (v.size() != cols_) throw domain_error("matrix apply shape mismatch");
        std::vector<Elem> r(rows_, field_.zero());
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j)
                r[i] = field_.add(r[i], field_.mul(at(i, j), v[j]));
        return r;
    }

    Matrix pow(u64 e) const {
        if (rows_ != cols_) throw domain_error("power of non-square matrix");
        Matrix r = identity(field_, rows_);
        Matrix b = *this;
        while (e) {
            if (e & 1) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

    Matrix transpose() const {
        Matrix r(field_, cols_, rows_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
        return r;
    }

    // In-place reduction to reduced row echelon form; returns pivot columns.
    std::vector<size_t> rref() {
        std::vector<size_t> pivots;
        size_t row = 0;
        for (size_t col = 0; col < cols_ && row < rows_; ++col) {
            size_t sel = row;
            while (sel < rows_ && field_.is_zero(at(sel, col))) ++sel;
            if (sel == rows_) continue;
            if (sel != row)
                for (size_t j = 0; j < cols_; ++j) std::swap(at(sel, j), at(row, j));
            Elem inv = field_.inv(at(row, col));
            for (size_t j = col; j < cols_; ++j) at(row, j) = field_.mul(at(row, j), inv);
            for (size_t i = 0; i < rows_; ++i) {
                if (i == row || field_.is_zero(at(i, col))) continue;
                Elem f = at(i, col);
                for (size_t j = col; j < cols_; ++j)
                    at(i, j) = field_.sub(at(i, j), field_.mul(f, at(row, j)));
            }
            pivots.push_back(col);
            ++row;
        }
        return pivots;
    }

    size_t rank() const {
        Matrix m = *this;
        return m.rref().size();
    }

    // Basis of the right kernel, one vector per non-pivot column, in column
    // order. The basis is canonical given the matrix.
    std::vector<std::vector<Elem>> kernel_basis() const {
        Matrix m = *this;
        std::vector<size_t> pivots = m.rref();
        std::vector<bool> is_pivot(cols_, false);
        for (size_t c : pivots) is_pivot[c] = true;
        std::vector<std::vector<Elem>> basis;
        for (size_t free = 0; free < cols_; ++free) {
            if (is_pivot[free]) continue;
            std::vector<Elem> v(cols_, field_.zero());
            v[free] = field_.one();
            for (size_t r = 0; r < pivots.size(); ++r)
                v[pivots[r]] = field_.neg(m.at(r, free));
            basis.push_back(std::move(v));
        }
        return basis;
    }

    // One solution of this * x = b, if any.
    std::optional<std::vector<Elem>> solve(const std::vector<Elem>& b) const {
        if (b.size() != rows_) throw domain_error("solve shape mismatch");
        Matrix aug(field_, rows_, cols_ + 1);
        for (size_t i = 0; i < rows_; ++i) {
            for (size_t j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
            aug.at(i, cols_) = b[i];
        }
        std::vector<size_t> pivots = aug.rref();
        for (size_t c : pivots)
            if (c == cols_) return std::nullopt;
        std::vector<Elem> x(cols_, field_.zero());
        for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug.at(r, cols_);
        return x;
    }

    std::optional<Matrix> inverse() const {
        if (rows_ != cols_) throw domain_error("inverse of non-square matrix");
        Matrix aug(field_, rows_, 2 * cols_);
        for (size_t i = 0; i < rows_; ++i) {
            for (size_t j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
            aug.at(i, cols_ + i) = field_.one();
        }
        std::vector<size_t> pivots = aug.rref();
        if (pivots.size() < rows_) return std::nullopt;
        for (size_t r = 0; r < rows_; ++r)
            if (pivots[r] != r) return std::nullopt;
        Matrix inv(field_, rows_, cols_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) inv.at(i, j) = aug.at(i, cols_ + j);
        return inv;
    }

    // Determinant by Leibniz expansion; works over commutative rings, which
    // is all the sizes r <= 4 used for matrices over A/(a) need.
    Elem det_small() const {
        if (rows_ != cols_) throw domain_error("determinant of non-square matrix");
        size_t n = rows_;
        if (n == 0) return field_.one();
        if (n > 5) throw cap_error("det_small limited to n <= 5");
        std::vector<size_t> perm(n);
        for (size_t i = 0; i < n; ++i) perm[i] = i;
        Elem acc = field_.zero();
        // iterate permutations with parity tracking
        std::vector<size_t> c(n, 0);
        int sign = 1;
        auto add_term = [&]() {
            Elem term = field_.one();
            for (size_t i = 0; i < n; ++i) term = field_.mul(term, at(i, perm[i]));
            acc = sign > 0 ? field_.add(acc, term) : field_.sub(acc, term);
        };
        add_term();
        size_t i = 0;
        while (i < n) {
            if (c[i] < i) {
                if (i % 2 == 0) std::swap(perm[0], perm[i]);
                else std::swap(perm[c[i]], perm[i]);
                sign = -sign;
                add_term();
                ++c[i];
                i = 0;
            } else {
                c[i] = 0;
                ++i;
            }
        }
        return acc;
    }

  private:
    void require_shape(const Matrix& o, size_t r, size_t c) const {
        if (o.rows_ != r || o.cols_ != c) throw domain_error("matrix shape mismatch");
    }

    F field_;
    size_t rows_, cols_;
    std::vector<Elem> d_;
};

} // namespace dkt
