#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "bytes.hpp"

namespace onetrace {

using Sha256Digest = std::array<uint8_t, 32>;

// Incremental SHA-256 (FIPS 180-4). Used for chain-of-custody hashing of
// every ingested input.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(ByteSpan data);
    Sha256Digest finish();

    static Sha256Digest of(ByteSpan data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    void compress(const uint8_t* block);

    std::array<uint32_t, 8> state_{};
    std::array<uint8_t, 64> buf_{};
    size_t buf_len_ = 0;
    uint64_t total_len_ = 0;
};

inline std::string sha256_hex(ByteSpan data) {
    auto d = Sha256::of(data);
    return to_hex(ByteSpan{d.data(), d.size()});
}

}  // namespace onetrace
