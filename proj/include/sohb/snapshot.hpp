#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sohb/model.hpp"

namespace sohb {

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct Diagnostics {
    double mass = 0.0;             // sum rho * cell volume, pairwise-summed
    double max_ortho_defect = 0.0; // max cell ||M M^T - I||_F
    double min_det = 0.0;
    double min_rho = 0.0;
};

/// Recomputed from the state at call time, never cached.
inline Diagnostics compute_diagnostics(const FluidState& s) {
    Diagnostics d;
    d.mass = pairwise_sum(s.rho.data()) * s.grid.cell_volume();
    d.max_ortho_defect = max_ortho_defect(s.M);
    d.min_det = min_det(s.M);
    d.min_rho = s.rho.min();
    return d;
}

inline double total_mass(const ScalarField& rho) {
    return pairwise_sum(rho.data()) * rho.grid().cell_volume();
}

inline double total_mass(const FluidState& s) { return total_mass(s.rho); }

// ---------------------------------------------------------------------------
// CSV snapshots
// ---------------------------------------------------------------------------

/// Header row plus one row per cell: coordinates, rho, row-major M entries.
/// A leading comment row carries the time and the recomputed diagnostics.
inline void write_snapshot_csv(const FluidState& s, double time, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.precision(17);
    const Diagnostics d = compute_diagnostics(s);
    out << "# time=" << time << " mass=" << d.mass << " max_ortho_defect=" << d.max_ortho_defect
        << " min_det=" << d.min_det << " min_rho=" << d.min_rho << "\n";
    const int n = s.grid.n;
    for (int a = 0; a < n; ++a) out << "x" << a + 1 << ",";
    out << "rho";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out << ",M" << i + 1 << j + 1;
    out << "\n";
    for_each_cell(s.grid, [&](int i, int j, int k, std::int64_t idx) {
        out << s.grid.coord(i, 0) << "," << s.grid.coord(j, 1) << ",";
        if (n == 3) out << s.grid.coord(k, 2) << ",";
        out << s.rho[idx];
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out << "," << s.M.at(idx, a, b);
        out << "\n";
    });
    if (!out) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// raw_f64 snapshots
//
// 32-byte header: magic "SOHBSNAP", u32 version = 1, u32 n, u32 dims[4]
// (unused slots zero), everything little-endian; then the rho array and the
// M array as little-endian f64, cell-major, matrices row-major.
// ---------------------------------------------------------------------------

namespace detail {

inline void store_u32_le(std::vector<std::byte>& buf, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf.push_back(static_cast<std::byte>((v >> (8 * b)) & 0xff));
}

inline void store_f64_le(std::vector<std::byte>& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    for (int b = 0; b < 8; ++b)
        buf.push_back(static_cast<std::byte>((bits >> (8 * b)) & 0xff));
}

inline std::uint32_t load_u32_le(const std::byte* p) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return v;
}

inline double load_f64_le(const std::byte* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

inline constexpr char kRawMagic[8] = {'S', 'O', 'H', 'B', 'S', 'N', 'A', 'P'};
inline constexpr std::uint32_t kRawVersion = 1;

inline std::vector<std::byte> encode_snapshot_raw(const FluidState& s) {
    std::vector<std::byte> buf;
    const std::int64_t cells = s.grid.size();
    buf.reserve(32 + static_cast<std::size_t>(cells) * (1 + s.grid.n * s.grid.n) * 8);
    for (char c : kRawMagic) buf.push_back(static_cast<std::byte>(c));
    detail::store_u32_le(buf, kRawVersion);
    detail::store_u32_le(buf, static_cast<std::uint32_t>(s.grid.n));
    for (int k = 0; k < 4; ++k)
        detail::store_u32_le(buf, k < s.grid.n ? static_cast<std::uint32_t>(s.grid.cells[k]) : 0);
    for (double v : s.rho.data()) detail::store_f64_le(buf, v);
    for (double v : s.M.data()) detail::store_f64_le(buf, v);
    return buf;
}

inline void write_snapshot_raw(const FluidState& s, const std::string& path) {
    const std::vector<std::byte> buf = encode_snapshot_raw(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

struct RawSnapshot {
    int n = 0;
    std::array<int, 3> cells{1, 1, 1};
    std::vector<double> rho;
    std::vector<double> m; // cell-major, matrices row-major
};

inline RawSnapshot read_snapshot_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    const std::string raw((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    const auto* buf_bytes = reinterpret_cast<const std::byte*>(raw.data());
    std::vector<std::byte> buf(buf_bytes, buf_bytes + raw.size());
    if (buf.size() < 32) throw IoError("snapshot '" + path + "' truncated");
    for (int i = 0; i < 8; ++i)
        if (static_cast<char>(buf[static_cast<std::size_t>(i)]) != kRawMagic[i])
            throw IoError("snapshot '" + path + "' has a bad magic");
    if (detail::load_u32_le(buf.data() + 8) != kRawVersion)
        throw IoError("snapshot '" + path + "' has an unsupported version");
    RawSnapshot snap;
    snap.n = static_cast<int>(detail::load_u32_le(buf.data() + 12));
    if (snap.n < 2 || snap.n > 3) throw IoError("snapshot '" + path + "' has a bad dimension");
    std::int64_t cells = 1;
    for (int k = 0; k < snap.n; ++k) {
        snap.cells[k] = static_cast<int>(detail::load_u32_le(buf.data() + 16 + 4 * k));
        cells *= snap.cells[k];
    }
    const std::size_t doubles =
        static_cast<std::size_t>(cells) * (1 + static_cast<std::size_t>(snap.n) * snap.n);
    if (buf.size() != 32 + doubles * 8) throw IoError("snapshot '" + path + "' has a bad size");
    snap.rho.resize(static_cast<std::size_t>(cells));
    snap.m.resize(static_cast<std::size_t>(cells) * snap.n * snap.n);
    const std::byte* p = buf.data() + 32;
    for (auto& v : snap.rho) {
        v = detail::load_f64_le(p);
        p += 8;
    }
    for (auto& v : snap.m) {
        v = detail::load_f64_le(p);
        p += 8;
    }
    return snap;
}

} // namespace sohb
