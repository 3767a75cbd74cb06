// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace agora {

// Dense matrix container: 16-byte header (4-byte magic "AGMX", u32
// format version, u32 rows, u32 cols), then rows·cols little-endian
// IEEE-754 doubles in row-major order. Round-trips are bit-exact.

inline constexpr char kMatrixMagic[4] = {'A', 'G', 'M', 'X'};
inline constexpr std::uint32_t kMatrixVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t value) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes, 4);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return value;
}

inline void put_f64(std::ostream& out, double value) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &value, sizeof bits);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(bytes, 8);
}

inline double get_f64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    double value = 0.0;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

} // namespace detail

inline void write_matrix(const Eigen::MatrixXd& m, std::ostream& out) {
    out.write(kMatrixMagic, 4);
    detail::put_u32(out, kMatrixVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            detail::put_f64(out, m(r, c));
    if (!out) throw std::runtime_error("matrix write failed");
}

inline void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_matrix(m, out);
}

inline Eigen::MatrixXd read_matrix(std::istream& in, const std::string& name = "matrix") {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMatrixMagic, 4) != 0)
        throw std::runtime_error(name + ": not a matrix file (bad magic)");
    const std::uint32_t version = detail::get_u32(in);
    if (version != kMatrixVersion)
        throw std::runtime_error(name + ": unsupported matrix format version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kMatrixVersion) + ")");
    const std::uint32_t rows = detail::get_u32(in);
    const std::uint32_t cols = detail::get_u32(in);
    if (!in) throw std::runtime_error(name + ": truncated header");
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            m(r, c) = detail::get_f64(in);
            if (!in) throw std::runtime_error(name + ": truncated array file");
        }
    }
    return m;
}

inline Eigen::MatrixXd read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    return read_matrix(in, path);
}

} // namespace agora
