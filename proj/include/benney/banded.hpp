#pragma once

// Square banded matrices and an LU factorization with partial pivoting.
//
// Storage follows the LAPACK general-band layout: element (i, j) of an n x n
// matrix with kl sub- and ku super-diagonals lives at band row ku + i - j of
// column j. Products and transposes keep the band exact, so composite
// difference operators assembled from narrow factors stay banded.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace benney {

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), data_(static_cast<std::size_t>(kl + ku + 1) * static_cast<std::size_t>(n), T{}) {
        if (n < 0 || kl < 0 || ku < 0) throw std::invalid_argument("negative banded matrix dimension");
    }

    static BandedMatrix identity(int n) {
        BandedMatrix m(n, 0, 0);
        for (int i = 0; i < n; ++i) m.ref(i, i) = T{1};
        return m;
    }

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_ && i >= 0 && j >= 0 && i < n_ && j < n_; }

    T operator()(int i, int j) const { return in_band(i, j) ? data_[index(i, j)] : T{}; }

    T& ref(int i, int j) {
        if (!in_band(i, j)) throw std::out_of_range("banded matrix element outside the band");
        return data_[index(i, j)];
    }

    /// Column range of row i that lies inside the band.
    int row_begin(int i) const { return std::max(0, i - kl_); }
    int row_end(int i) const { return std::min(n_, i + ku_ + 1); }

    void multiply(std::span<const T> x, std::span<T> y) const {
        assert(static_cast<int>(x.size()) == n_ && static_cast<int>(y.size()) == n_);
        for (int i = 0; i < n_; ++i) {
            T s{};
            for (int j = row_begin(i); j < row_end(i); ++j) s += data_[index(i, j)] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
    }

    std::vector<T> operator*(const std::vector<T>& x) const {
        std::vector<T> y(x.size());
        multiply(x, y);
        return y;
    }

    BandedMatrix transposed() const {
        BandedMatrix t(n_, ku_, kl_);
        for (int i = 0; i < n_; ++i)
            for (int j = row_begin(i); j < row_end(i); ++j) t.ref(j, i) = (*this)(i, j);
        return t;
    }

    friend BandedMatrix operator*(const BandedMatrix& a, const BandedMatrix& b) {
        if (a.n_ != b.n_) throw std::invalid_argument("banded product size mismatch");
        BandedMatrix c(a.n_, std::min(a.n_ - 1, a.kl_ + b.kl_), std::min(a.n_ - 1, a.ku_ + b.ku_));
        for (int i = 0; i < a.n_; ++i)
            for (int m = a.row_begin(i); m < a.row_end(i); ++m) {
                const T aim = a(i, m);
                if (aim == T{}) continue;
                for (int j = b.row_begin(m); j < b.row_end(m); ++j) c.ref(i, j) += aim * b(m, j);
            }
        return c;
    }

    /// alpha * a + beta * b with the union band.
    static BandedMatrix combine(T alpha, const BandedMatrix& a, T beta, const BandedMatrix& b) {
        if (a.n_ != b.n_) throw std::invalid_argument("banded sum size mismatch");
        BandedMatrix c(a.n_, std::max(a.kl_, b.kl_), std::max(a.ku_, b.ku_));
        for (int i = 0; i < a.n_; ++i) {
            for (int j = a.row_begin(i); j < a.row_end(i); ++j) c.ref(i, j) += alpha * a(i, j);
            for (int j = b.row_begin(i); j < b.row_end(i); ++j) c.ref(i, j) += beta * b(i, j);
        }
        return c;
    }

    /// diag(left) * this * diag(right); empty spans mean identity.
    BandedMatrix scaled(std::span<const T> left, std::span<const T> right) const {
        BandedMatrix c = *this;
        for (int i = 0; i < n_; ++i)
            for (int j = row_begin(i); j < row_end(i); ++j) {
                T& v = c.data_[index(i, j)];
                if (!left.empty()) v *= left[static_cast<std::size_t>(i)];
                if (!right.empty()) v *= right[static_cast<std::size_t>(j)];
            }
        return c;
    }

    /// Principal submatrix on rows/columns [first, first + count).
    BandedMatrix block(int first, int count) const {
        BandedMatrix c(count, std::min(kl_, std::max(0, count - 1)), std::min(ku_, std::max(0, count - 1)));
        for (int i = 0; i < count; ++i)
            for (int j = c.row_begin(i); j < c.row_end(i); ++j) c.ref(i, j) = (*this)(first + i, first + j);
        return c;
    }

    friend bool operator==(const BandedMatrix&, const BandedMatrix&) = default;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(ku_ + i - j) + static_cast<std::size_t>(j) * static_cast<std::size_t>(kl_ + ku_ + 1);
    }

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<T> data_;
};

/// Banded LU with row partial pivoting (the gbtf2/gbtrs scheme). The factor
/// keeps kl extra super-diagonals for pivoting fill-in.
template <class T>
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix<T>& a) : n_(a.size()), kl_(a.lower()), ku_(a.upper()) {
        ldab_ = 2 * kl_ + ku_ + 1;
        ab_.assign(static_cast<std::size_t>(ldab_) * static_cast<std::size_t>(n_), T{});
        pivots_.assign(static_cast<std::size_t>(n_), 0);
        for (int i = 0; i < n_; ++i)
            for (int j = a.row_begin(i); j < a.row_end(i); ++j) at(i, j) = a(i, j);
        factorize();
    }

    int size() const { return n_; }

    void solve_in_place(std::span<T> b) const {
        if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("banded solve size mismatch");
        for (int j = 0; j < n_; ++j) {
            const int p = pivots_[static_cast<std::size_t>(j)];
            if (p != j) std::swap(b[static_cast<std::size_t>(j)], b[static_cast<std::size_t>(p)]);
            const int km = std::min(kl_, n_ - 1 - j);
            const T bj = b[static_cast<std::size_t>(j)];
            for (int i = 1; i <= km; ++i) b[static_cast<std::size_t>(j + i)] -= at(j + i, j) * bj;
        }
        const int kv = kl_ + ku_;
        for (int j = n_ - 1; j >= 0; --j) {
            b[static_cast<std::size_t>(j)] /= at(j, j);
            const T bj = b[static_cast<std::size_t>(j)];
            for (int i = std::max(0, j - kv); i < j; ++i) b[static_cast<std::size_t>(i)] -= at(i, j) * bj;
        }
    }

    std::vector<T> solve(std::vector<T> b) const {
        solve_in_place(b);
        return b;
    }

private:
    T& at(int i, int j) { return ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_]; }
    T at(int i, int j) const {
        return ab_[static_cast<std::size_t>(kl_ + ku_ + i - j) + static_cast<std::size_t>(j) * ldab_];
    }

    void factorize() {
        int ju = 0;
        for (int j = 0; j < n_; ++j) {
            const int km = std::min(kl_, n_ - 1 - j);
            int p = 0;
            T best = std::abs(at(j, j));
            for (int i = 1; i <= km; ++i)
                if (std::abs(at(j + i, j)) > best) {
                    best = std::abs(at(j + i, j));
                    p = i;
                }
            pivots_[static_cast<std::size_t>(j)] = j + p;
            if (best == T{}) throw SingularMatrix("banded matrix is singular at column " + std::to_string(j));
            ju = std::max(ju, std::min(j + ku_ + p, n_ - 1));
            if (p != 0)
                for (int c = j; c <= ju; ++c) std::swap(at(j, c), at(j + p, c));
            const T inv = T{1} / at(j, j);
            for (int i = 1; i <= km; ++i) at(j + i, j) *= inv;
            for (int c = j + 1; c <= ju; ++c) {
                const T ujc = at(j, c);
                if (ujc == T{}) continue;
                for (int i = 1; i <= km; ++i) at(j + i, c) -= at(j + i, j) * ujc;
            }
        }
    }

    int n_, kl_, ku_, ldab_ = 0;
    std::vector<T> ab_;
    std::vector<int> pivots_;
};

}  // namespace benney
