#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ciflow/errors.hpp"

namespace ciflow {

/// Real sparse matrix assembled from (row, col, value) triplets. Duplicate
/// positions accumulate. finalize() compiles the triplets into compressed
/// column storage; mutation is rejected afterwards.
class SparseMatrix {
  public:
    SparseMatrix() = default;
    explicit SparseMatrix(int dim) : dim_(dim) {}

    void add(int row, int col, double value);

    void finalize();
    bool finalized() const { return finalized_; }

    int dim() const { return dim_; }
    int nnz() const;
    bool symmetric_pattern() const { return symmetric_pattern_; }

    // Compressed column view (valid after finalize).
    const std::vector<int>& col_start() const { return col_start_; }
    const std::vector<int>& row_index() const { return row_index_; }
    const std::vector<double>& values() const { return values_; }

    std::vector<double> multiply(std::span<const double> v) const;

    bool operator==(const SparseMatrix& other) const = default;

  private:
    struct Triplet {
        int row, col;
        double value;

        friend bool operator==(const Triplet&, const Triplet&) = default;
    };

    int dim_ = 0;
    bool finalized_ = false;
    bool symmetric_pattern_ = false;
    std::vector<Triplet> triplets_;
    std::vector<int> col_start_;
    std::vector<int> row_index_;
    std::vector<double> values_;
};

/// LU factors of a permuted square matrix (PA = LU, partial pivoting).
/// Immutable once built; concurrent solve() calls are safe.
class Factorization {
  public:
    int dim() const { return static_cast<int>(pivot_row_.size()); }

    /// Forward/backward substitution. Does not touch the factorization counter.
    std::vector<double> solve(std::span<const double> rhs) const;

  private:
    friend Factorization factorize(const SparseMatrix& m);

    struct Col {
        std::vector<int> index;       // L: original row ids; U: pivot steps k < j
        std::vector<double> value;
    };

    std::vector<int> pivot_row_;      // step k -> original row chosen as pivot
    std::vector<Col> lower_;          // unit lower triangular columns (multipliers)
    std::vector<Col> upper_;          // strict upper columns
    std::vector<double> diag_;        // U(j, j)
};

/// PA = LU with partial row pivoting. Pivots smaller than 1e-12 of the
/// original column magnitude raise SingularMatrixError with the column index.
/// Each call increments the global factorization counter.
Factorization factorize(const SparseMatrix& m);

/// Monotone process-wide count of factorize() calls, exposed so tests and the
/// benchmark can assert how often a solver rebuilt its matrix.
std::uint64_t factorization_count();

}  // namespace ciflow
