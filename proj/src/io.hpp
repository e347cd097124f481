#pragma once

#include <string>

#include "sellcs.hpp"

namespace sellkit {

/// Header of the versioned binary CRS file format ("GCRS", little-endian).
/// flags: bit0 complex values, bit1 single precision, bit2 64-bit column
/// indices. The row pointer array is always stored as 64-bit.
struct BinaryCrsHeader {
    static constexpr char magic[4] = {'G', 'C', 'R', 'S'};
    static constexpr std::uint32_t version = 1;
    std::uint32_t flags = 0;
    std::uint64_t nrows = 0, ncols = 0, nnz = 0;

    Datatype datatype() const {
        const bool cplx = flags & 1u, single = flags & 2u;
        if (cplx) return single ? Datatype::c32 : Datatype::c64;
        return single ? Datatype::r32 : Datatype::r64;
    }
    bool wide_cols() const { return flags & 4u; }
};

/// Read the header only (used to pick the element type before a full read).
BinaryCrsHeader read_binary_crs_header(const std::string& path);

template <class T>
CrsData<T> read_matrix_market(const std::string& path);

template <class T>
CrsData<T> read_binary_crs(const std::string& path);

/// wide_cols forces 64-bit column indices; otherwise 32-bit indices are
/// written whenever the column count permits.
template <class T>
void write_binary_crs(const std::string& path, const CrsData<T>& crs, bool wide_cols = false);

/// Adapter exposing CRS rows through the row-callback construction interface.
template <class T>
RowSource<T> rowsource_from_crs(const CrsData<T>& crs) {
    RowSource<T> src;
    src.nrows = crs.nrows;
    src.ncols = crs.ncols;
    lidx maxlen = 0;
    for (gidx r = 0; r < crs.nrows; ++r) maxlen = std::max(maxlen, crs.rowlen(r));
    src.max_rowlen = maxlen;
    src.fn = [&crs](gidx row, lidx& len, gidx* cols, T* vals) {
        len = crs.rowlen(row);
        const gidx b = crs.rowptr[row];
        for (lidx j = 0; j < len; ++j) {
            cols[j] = crs.col[b + j];
            vals[j] = crs.val[b + j];
        }
    };
    return src;
}

} // namespace sellkit
