#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ciflow/linsolve.hpp"
#include "ciflow/network.hpp"
#include "ciflow/stamps.hpp"

namespace ciflow {

/// Node admittance matrix in internal (dense) index space, stored as sorted
/// row-major entries with a CSR-style row offset array. Structurally symmetric.
class YBus {
  public:
    struct Entry {
        int row;
        int col;
        Complex y;
    };

    YBus() = default;
    YBus(int n, std::vector<Entry> sorted_entries);

    int size() const { return n_; }
    const std::vector<Entry>& entries() const { return entries_; }

    std::span<const Entry> row(int r) const {
        return {entries_.data() + row_start_[r],
                entries_.data() + row_start_[r + 1]};
    }

    /// Entry (r, c), complex zero when not stored.
    Complex at(int r, int c) const;

    /// y * v over the complex entries.
    std::vector<Complex> multiply(std::span<const Complex> v) const;

  private:
    int n_ = 0;
    std::vector<Entry> entries_;     // sorted by (row, col), unique
    std::vector<int> row_start_;     // size n_ + 1
};

/// Stamp every branch terminal circuit plus the bus shunts into the n x n
/// admittance matrix. The case must already be valid (see validate_case).
YBus assemble_ybus(const NetworkCase& net);

/// Expand each complex entry G+jB into the 2x2 real block [[G, -B], [B, G]] at
/// interleaved (x, y) coordinates, giving the 2n x 2n real operator on
/// [V1x, V1y, ..., Vnx, Vny]. All four block positions are stored even when G
/// or B is zero.
SparseMatrix real_block_expand(const YBus& y);

}  // namespace ciflow
