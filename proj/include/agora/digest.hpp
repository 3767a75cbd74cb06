// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agora {

/// Streaming FNV-1a (64-bit) content hash. Used for corpus and artifact
/// integrity checks, not for anything adversarial.
class Digest {
public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= kPrime;
        }
    }

    void update(const void* data, std::size_t n) {
        update(std::string_view(static_cast<const char*>(data), n));
    }

    std::uint64_t value() const { return state_; }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        std::uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<std::size_t>(i)] = digits[v & 0xF];
            v >>= 4;
        }
        return out;
    }

private:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime = 0x00000100000001b3ULL;
    std::uint64_t state_ = kOffset;
};

inline std::string digest_hex(std::string_view bytes) {
    Digest d;
    d.update(bytes);
    return d.hex();
}

inline std::string digest_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    Digest d;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        d.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

} // namespace agora
