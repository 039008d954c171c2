#pragma once

// Result files: energy.csv and BLN1 state snapshots.
//
// Snapshot layout, little-endian:
//   "BLN1" | u64 n | f64 L | f64 t | (n+1) x f64 values

#include "benney/stepper.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace benney {

inline constexpr const char* energy_csv_header = "t,l2_sq,dx_sq,dxx_sq,trace0_sq,sup_u,identity_residual";

namespace detail {

inline void append_real(std::string& out, double v) {
    if (std::isnan(v)) return;  // absent metric: empty field
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace detail

inline std::string format_energy_csv(const std::vector<EnergyRecord>& records) {
    std::string out = energy_csv_header;
    out += '\n';
    for (const auto& r : records) {
        for (double v : {r.t, r.l2_sq, r.dx_sq, r.dxx_sq, r.trace0_sq, r.sup_u}) {
            detail::append_real(out, v);
            out += ',';
        }
        detail::append_real(out, r.identity_residual);
        out += '\n';
    }
    return out;
}

/// Writes to a sibling temporary and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// --- snapshots ------------------------------------------------------------

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
    static_assert(sizeof(T) == 8);
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xff);
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw std::runtime_error("truncated snapshot");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return std::bit_cast<T>(bits);
}

}  // namespace detail

struct SnapshotData {
    std::uint64_t n = 0;
    double L = 0.0;
    double t = 0.0;
    std::vector<double> values;
};

inline std::string encode_snapshot(const GridFunction& u, double t) {
    std::string out = "BLN1";
    detail::put_le(out, static_cast<std::uint64_t>(u.grid->n));
    detail::put_le(out, u.grid->L);
    detail::put_le(out, t);
    for (double v : u.values) detail::put_le(out, v);
    return out;
}

inline SnapshotData decode_snapshot(const std::string& bytes) {
    if (bytes.size() < 4 || bytes.compare(0, 4, "BLN1") != 0) throw std::runtime_error("not a BLN1 snapshot");
    std::size_t pos = 4;
    SnapshotData s;
    s.n = detail::get_le<std::uint64_t>(bytes, pos);
    s.L = detail::get_le<double>(bytes, pos);
    s.t = detail::get_le<double>(bytes, pos);
    if ((bytes.size() - pos) / 8 != s.n + 1 || (bytes.size() - pos) % 8 != 0)
        throw std::runtime_error("snapshot payload does not hold n+1 values");
    s.values.resize(s.n + 1);
    for (auto& v : s.values) v = detail::get_le<double>(bytes, pos);
    return s;
}

}  // namespace benney
