#include "ciflow/linsolve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

namespace ciflow {

namespace {
std::atomic<std::uint64_t> g_factorizations{0};
constexpr double kPivotRelTol = 1e-12;
}  // namespace

std::uint64_t factorization_count() { return g_factorizations.load(); }

void SparseMatrix::add(int row, int col, double value) {
    if (finalized_) throw Error("SparseMatrix: add after finalize");
    if (row < 0 || row >= dim_ || col < 0 || col >= dim_) {
        throw Error("SparseMatrix: index out of range");
    }
    triplets_.push_back({row, col, value});
}

void SparseMatrix::finalize() {
    if (finalized_) return;
    std::sort(triplets_.begin(), triplets_.end(), [](const Triplet& a, const Triplet& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    col_start_.assign(static_cast<std::size_t>(dim_) + 1, 0);
    row_index_.clear();
    values_.clear();
    std::size_t i = 0;
    for (int c = 0; c < dim_; ++c) {
        while (i < triplets_.size() && triplets_[i].col == c) {
            int r = triplets_[i].row;
            double v = 0.0;
            while (i < triplets_.size() && triplets_[i].col == c && triplets_[i].row == r) {
                v += triplets_[i].value;
                ++i;
            }
            row_index_.push_back(r);
            values_.push_back(v);
        }
        col_start_[static_cast<std::size_t>(c) + 1] = static_cast<int>(row_index_.size());
    }
    triplets_.clear();
    triplets_.shrink_to_fit();

    std::set<std::pair<int, int>> pattern;
    for (int c = 0; c < dim_; ++c) {
        for (int k = col_start_[c]; k < col_start_[c + 1]; ++k) {
            pattern.emplace(row_index_[static_cast<std::size_t>(k)], c);
        }
    }
    symmetric_pattern_ = std::all_of(pattern.begin(), pattern.end(), [&](const auto& rc) {
        return pattern.count({rc.second, rc.first}) > 0;
    });
    finalized_ = true;
}

int SparseMatrix::nnz() const {
    return finalized_ ? static_cast<int>(values_.size()) : static_cast<int>(triplets_.size());
}

std::vector<double> SparseMatrix::multiply(std::span<const double> v) const {
    if (!finalized_) throw Error("SparseMatrix: multiply before finalize");
    std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
    for (int c = 0; c < dim_; ++c) {
        const double vc = v[static_cast<std::size_t>(c)];
        for (int k = col_start_[c]; k < col_start_[c + 1]; ++k) {
            out[static_cast<std::size_t>(row_index_[static_cast<std::size_t>(k)])] +=
                values_[static_cast<std::size_t>(k)] * vc;
        }
    }
    return out;
}

// Left-looking LU with partial pivoting and a dense work column. Columns of L
// keep original row ids; U columns are indexed by pivot step. Exact zeros in
// the work column skip their elimination step, which keeps the sparse cost.
Factorization factorize(const SparseMatrix& m) {
    if (!m.finalized()) throw Error("factorize: matrix not finalized");
    const int n = m.dim();
    if (n <= 0) throw Error("factorize: empty matrix");

    Factorization f;
    f.pivot_row_.assign(static_cast<std::size_t>(n), -1);
    f.lower_.resize(static_cast<std::size_t>(n));
    f.upper_.resize(static_cast<std::size_t>(n));
    f.diag_.assign(static_cast<std::size_t>(n), 0.0);

    const auto& col_start = m.col_start();
    const auto& row_index = m.row_index();
    const auto& values = m.values();

    std::vector<char> pivoted(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);

    for (int j = 0; j < n; ++j) {
        std::fill(x.begin(), x.end(), 0.0);
        double colmax = 0.0;
        for (int k = col_start[j]; k < col_start[j + 1]; ++k) {
            x[static_cast<std::size_t>(row_index[static_cast<std::size_t>(k)])] =
                values[static_cast<std::size_t>(k)];
            colmax = std::max(colmax, std::abs(values[static_cast<std::size_t>(k)]));
        }

        auto& ucol = f.upper_[static_cast<std::size_t>(j)];
        for (int k = 0; k < j; ++k) {
            const double v = x[static_cast<std::size_t>(f.pivot_row_[static_cast<std::size_t>(k)])];
            if (v == 0.0) continue;
            ucol.index.push_back(k);
            ucol.value.push_back(v);
            const auto& lcol = f.lower_[static_cast<std::size_t>(k)];
            for (std::size_t t = 0; t < lcol.index.size(); ++t) {
                x[static_cast<std::size_t>(lcol.index[t])] -= lcol.value[t] * v;
            }
        }

        int prow = -1;
        double pmag = -1.0;
        for (int r = 0; r < n; ++r) {
            if (pivoted[static_cast<std::size_t>(r)]) continue;
            const double mag = std::abs(x[static_cast<std::size_t>(r)]);
            if (mag > pmag) {
                pmag = mag;
                prow = r;
            }
        }
        if (prow < 0 || pmag <= kPivotRelTol * std::max(colmax, 1e-300)) {
            throw SingularMatrixError("numerically singular matrix", j);
        }

        const double pivot = x[static_cast<std::size_t>(prow)];
        f.pivot_row_[static_cast<std::size_t>(j)] = prow;
        f.diag_[static_cast<std::size_t>(j)] = pivot;
        pivoted[static_cast<std::size_t>(prow)] = 1;

        auto& lcol = f.lower_[static_cast<std::size_t>(j)];
        for (int r = 0; r < n; ++r) {
            if (pivoted[static_cast<std::size_t>(r)]) continue;
            const double v = x[static_cast<std::size_t>(r)];
            if (v != 0.0) {
                lcol.index.push_back(r);
                lcol.value.push_back(v / pivot);
            }
        }
    }

    g_factorizations.fetch_add(1, std::memory_order_relaxed);
    return f;
}

std::vector<double> Factorization::solve(std::span<const double> rhs) const {
    const int n = dim();
    if (static_cast<int>(rhs.size()) != n) {
        throw Error("solve: rhs length does not match matrix dimension");
    }
    std::vector<double> x(rhs.begin(), rhs.end());

    for (int k = 0; k < n; ++k) {
        const double v = x[static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(k)])];
        if (v == 0.0) continue;
        const Col& lcol = lower_[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < lcol.index.size(); ++t) {
            x[static_cast<std::size_t>(lcol.index[t])] -= lcol.value[t] * v;
        }
    }

    std::vector<double> y(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        y[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(pivot_row_[static_cast<std::size_t>(k)])];
    }
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int j = n - 1; j >= 0; --j) {
        const double zj = y[static_cast<std::size_t>(j)] / diag_[static_cast<std::size_t>(j)];
        z[static_cast<std::size_t>(j)] = zj;
        const Col& ucol = upper_[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < ucol.index.size(); ++t) {
            y[static_cast<std::size_t>(ucol.index[t])] -= ucol.value[t] * zj;
        }
    }
    return z;
}

}  // namespace ciflow
