#include "io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace sellkit {

namespace {

// ---------------------------------------------------------------- binary ---

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    SK_REQUIRE(bool(is), errc::io, "truncated binary CRS file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    SK_REQUIRE(bool(is), errc::io, "truncated binary CRS file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

template <class R>
void put_real(std::ostream& os, R v) {
    if constexpr (sizeof(R) == 4)
        put_u32(os, std::bit_cast<std::uint32_t>(v));
    else
        put_u64(os, std::bit_cast<std::uint64_t>(v));
}

template <class R>
R get_real(std::istream& is) {
    if constexpr (sizeof(R) == 4)
        return std::bit_cast<R>(get_u32(is));
    else
        return std::bit_cast<R>(get_u64(is));
}

template <class T>
void put_value(std::ostream& os, T v) {
    using R = typename scalar_traits<T>::real_type;
    if constexpr (scalar_traits<T>::is_complex) {
        put_real<R>(os, v.real());
        put_real<R>(os, v.imag());
    } else {
        put_real<R>(os, v);
    }
}

template <class T>
T get_value(std::istream& is) {
    using R = typename scalar_traits<T>::real_type;
    if constexpr (scalar_traits<T>::is_complex) {
        R re = get_real<R>(is);
        R im = get_real<R>(is);
        return T(re, im);
    } else {
        return get_real<R>(is);
    }
}

BinaryCrsHeader read_header(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    SK_REQUIRE(bool(is) && std::memcmp(magic, BinaryCrsHeader::magic, 4) == 0, errc::io,
               "bad magic, not a binary CRS file");
    const std::uint32_t version = get_u32(is);
    SK_REQUIRE(version == BinaryCrsHeader::version, errc::io, "unknown binary CRS version");
    BinaryCrsHeader h;
    h.flags = get_u32(is);
    h.nrows = get_u64(is);
    h.ncols = get_u64(is);
    h.nnz = get_u64(is);
    return h;
}

// ----------------------------------------------------------- matrix market ---

struct MmEntry {
    gidx row, col;
    double re = 0.0, im = 0.0;
};

struct MmHeader {
    bool coordinate = true;
    enum class Field { real, integer, complex_, pattern } field = Field::real;
    enum class Symmetry { general, symmetric, skew, hermitian } symmetry = Symmetry::general;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

MmHeader parse_banner(const std::string& line) {
    std::istringstream ss(line);
    std::string banner, object, format, field, symmetry;
    ss >> banner >> object >> format >> field >> symmetry;
    SK_REQUIRE(banner == "%%MatrixMarket", errc::io, "missing %%MatrixMarket banner");
    SK_REQUIRE(lower(object) == "matrix", errc::io, "only matrix objects are supported");
    MmHeader h;
    const std::string f = lower(format);
    if (f == "coordinate")
        h.coordinate = true;
    else if (f == "array")
        h.coordinate = false;
    else
        fail(errc::io, "unknown Matrix Market format: " + format);
    const std::string fld = lower(field);
    if (fld == "real")
        h.field = MmHeader::Field::real;
    else if (fld == "integer")
        h.field = MmHeader::Field::integer;
    else if (fld == "complex")
        h.field = MmHeader::Field::complex_;
    else if (fld == "pattern")
        h.field = MmHeader::Field::pattern;
    else
        fail(errc::io, "unknown Matrix Market field: " + field);
    const std::string sym = lower(symmetry);
    if (sym == "general")
        h.symmetry = MmHeader::Symmetry::general;
    else if (sym == "symmetric")
        h.symmetry = MmHeader::Symmetry::symmetric;
    else if (sym == "skew-symmetric")
        h.symmetry = MmHeader::Symmetry::skew;
    else if (sym == "hermitian")
        h.symmetry = MmHeader::Symmetry::hermitian;
    else
        fail(errc::io, "unknown Matrix Market symmetry: " + symmetry);
    SK_REQUIRE(h.coordinate || h.field != MmHeader::Field::pattern, errc::io,
               "array format cannot be pattern");
    return h;
}

bool next_content_line(std::istream& is, std::string& line) {
    while (std::getline(is, line)) {
        std::size_t p = line.find_first_not_of(" \t\r\n");
        if (p == std::string::npos) continue;
        if (line[p] == '%') continue;
        return true;
    }
    return false;
}

template <class T>
CrsData<T> assemble(gidx nrows, gidx ncols, std::vector<MmEntry>& entries) {
    for (const auto& e : entries)
        SK_REQUIRE(e.row >= 0 && e.row < nrows && e.col >= 0 && e.col < ncols, errc::io,
                   "matrix market index out of range");
    std::stable_sort(entries.begin(), entries.end(), [](const MmEntry& a, const MmEntry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CrsData<T> out;
    out.nrows = nrows;
    out.ncols = ncols;
    out.rowptr.assign(static_cast<std::size_t>(nrows) + 1, 0);
    out.col.reserve(entries.size());
    out.val.reserve(entries.size());
    std::size_t i = 0;
    while (i < entries.size()) {
        // duplicates are summed
        double re = 0.0, im = 0.0;
        const gidx r = entries[i].row, c = entries[i].col;
        while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
            re += entries[i].re;
            im += entries[i].im;
            ++i;
        }
        out.col.push_back(c);
        if constexpr (scalar_traits<T>::is_complex) {
            using R = typename scalar_traits<T>::real_type;
            out.val.push_back(T(static_cast<R>(re), static_cast<R>(im)));
        } else {
            SK_REQUIRE(im == 0.0, errc::io, "complex data cannot be read into a real matrix");
            out.val.push_back(static_cast<T>(re));
        }
        out.rowptr[r + 1]++;
    }
    for (gidx r = 0; r < nrows; ++r) out.rowptr[r + 1] += out.rowptr[r];
    return out;
}

} // namespace

BinaryCrsHeader read_binary_crs_header(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    SK_REQUIRE(bool(is), errc::io, "cannot open " + path);
    return read_header(is);
}

template <class T>
CrsData<T> read_matrix_market(const std::string& path) {
    std::ifstream is(path);
    SK_REQUIRE(bool(is), errc::io, "cannot open " + path);
    std::string line;
    SK_REQUIRE(bool(std::getline(is, line)), errc::io, "empty file");
    const MmHeader h = parse_banner(line);
    SK_REQUIRE(next_content_line(is, line), errc::io, "missing size line");
    std::istringstream size_ss(line);

    const bool want_complex = scalar_traits<T>::is_complex;
    SK_REQUIRE(h.field != MmHeader::Field::complex_ || want_complex, errc::io,
               "complex data cannot be read into a real matrix");

    std::vector<MmEntry> entries;
    gidx nrows = 0, ncols = 0;

    auto push_expanded = [&](gidx r, gidx c, double re, double im) {
        entries.push_back({r, c, re, im});
        if (r == c) {
            SK_REQUIRE(h.symmetry != MmHeader::Symmetry::skew, errc::io,
                       "skew-symmetric files must not contain diagonal entries");
            return;
        }
        switch (h.symmetry) {
            case MmHeader::Symmetry::general: break;
            case MmHeader::Symmetry::symmetric: entries.push_back({c, r, re, im}); break;
            case MmHeader::Symmetry::skew: entries.push_back({c, r, -re, -im}); break;
            case MmHeader::Symmetry::hermitian: entries.push_back({c, r, re, -im}); break;
        }
    };

    if (h.coordinate) {
        gidx nnz = 0;
        size_ss >> nrows >> ncols >> nnz;
        SK_REQUIRE(bool(size_ss), errc::io, "malformed size line");
        entries.reserve(static_cast<std::size_t>(nnz) * 2);
        for (gidx k = 0; k < nnz; ++k) {
            SK_REQUIRE(next_content_line(is, line), errc::io, "unexpected end of entries");
            std::istringstream es(line);
            gidx i1 = 0, j1 = 0;
            double re = 1.0, im = 0.0;
            es >> i1 >> j1;
            if (h.field == MmHeader::Field::complex_)
                es >> re >> im;
            else if (h.field != MmHeader::Field::pattern)
                es >> re;
            SK_REQUIRE(bool(es), errc::io, "malformed entry line");
            push_expanded(i1 - 1, j1 - 1, re, im);
        }
    } else {
        size_ss >> nrows >> ncols;
        SK_REQUIRE(bool(size_ss), errc::io, "malformed size line");
        const bool lower_only = h.symmetry != MmHeader::Symmetry::general;
        if (lower_only)
            SK_REQUIRE(nrows == ncols, errc::io, "symmetric array matrices must be square");
        for (gidx j = 0; j < ncols; ++j) {
            gidx i0 = lower_only ? (h.symmetry == MmHeader::Symmetry::skew ? j + 1 : j) : 0;
            for (gidx i = i0; i < nrows; ++i) {
                SK_REQUIRE(next_content_line(is, line), errc::io, "unexpected end of entries");
                std::istringstream es(line);
                double re = 0.0, im = 0.0;
                es >> re;
                if (h.field == MmHeader::Field::complex_) es >> im;
                SK_REQUIRE(bool(es), errc::io, "malformed entry line");
                push_expanded(i, j, re, im);
            }
        }
    }
    return assemble<T>(nrows, ncols, entries);
}

template <class T>
CrsData<T> read_binary_crs(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    SK_REQUIRE(bool(is), errc::io, "cannot open " + path);
    const BinaryCrsHeader h = read_header(is);
    SK_REQUIRE(h.datatype() == scalar_traits<T>::datatype, errc::io,
               "binary CRS element type does not match the requested type");
    CrsData<T> out;
    out.nrows = static_cast<gidx>(h.nrows);
    out.ncols = static_cast<gidx>(h.ncols);
    out.rowptr.resize(static_cast<std::size_t>(h.nrows) + 1);
    for (auto& p : out.rowptr) p = static_cast<gidx>(get_u64(is));
    SK_REQUIRE(out.rowptr.front() == 0 && out.rowptr.back() == gidx(h.nnz), errc::io,
               "row pointer array inconsistent with header nonzero count");
    for (std::size_t r = 0; r + 1 < out.rowptr.size(); ++r)
        SK_REQUIRE(out.rowptr[r] <= out.rowptr[r + 1], errc::io, "row pointers must be non-decreasing");
    out.col.resize(static_cast<std::size_t>(h.nnz));
    if (h.wide_cols())
        for (auto& c : out.col) c = static_cast<gidx>(get_u64(is));
    else
        for (auto& c : out.col) c = static_cast<gidx>(get_u32(is));
    out.val.resize(static_cast<std::size_t>(h.nnz));
    for (auto& v : out.val) v = get_value<T>(is);
    is.peek();
    SK_REQUIRE(is.eof(), errc::io, "trailing bytes after binary CRS payload");
    out.validate();
    return out;
}

template <class T>
void write_binary_crs(const std::string& path, const CrsData<T>& crs, bool wide_cols) {
    crs.validate();
    const bool wide = wide_cols || crs.ncols > gidx(INT32_MAX);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    SK_REQUIRE(bool(os), errc::io, "cannot write " + path);
    os.write(BinaryCrsHeader::magic, 4);
    put_u32(os, BinaryCrsHeader::version);
    std::uint32_t flags = 0;
    if (scalar_traits<T>::is_complex) flags |= 1u;
    if (sizeof(typename scalar_traits<T>::real_type) == 4) flags |= 2u;
    if (wide) flags |= 4u;
    put_u32(os, flags);
    put_u64(os, static_cast<std::uint64_t>(crs.nrows));
    put_u64(os, static_cast<std::uint64_t>(crs.ncols));
    put_u64(os, static_cast<std::uint64_t>(crs.nnz()));
    for (gidx p : crs.rowptr) put_u64(os, static_cast<std::uint64_t>(p));
    if (wide)
        for (gidx c : crs.col) put_u64(os, static_cast<std::uint64_t>(c));
    else
        for (gidx c : crs.col) put_u32(os, static_cast<std::uint32_t>(c));
    for (const T& v : crs.val) put_value(os, v);
    SK_REQUIRE(bool(os), errc::io, "write failure on " + path);
}

template CrsData<float> read_matrix_market<float>(const std::string&);
template CrsData<double> read_matrix_market<double>(const std::string&);
template CrsData<std::complex<float>> read_matrix_market<std::complex<float>>(const std::string&);
template CrsData<std::complex<double>> read_matrix_market<std::complex<double>>(const std::string&);

template CrsData<float> read_binary_crs<float>(const std::string&);
template CrsData<double> read_binary_crs<double>(const std::string&);
template CrsData<std::complex<float>> read_binary_crs<std::complex<float>>(const std::string&);
template CrsData<std::complex<double>> read_binary_crs<std::complex<double>>(const std::string&);

template void write_binary_crs<float>(const std::string&, const CrsData<float>&, bool);
template void write_binary_crs<double>(const std::string&, const CrsData<double>&, bool);
template void write_binary_crs<std::complex<float>>(const std::string&,
                                                    const CrsData<std::complex<float>>&, bool);
template void write_binary_crs<std::complex<double>>(const std::string&,
                                                     const CrsData<std::complex<double>>&, bool);

} // namespace sellkit
