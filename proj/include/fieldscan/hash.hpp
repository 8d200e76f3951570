#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace fieldscan {

/// Incremental FNV-1a (64-bit). Used for config hashes and matrix
/// fingerprints; stable across runs and platforms by construction.
class Fnv1a {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }

    void update(std::string_view s) { update(s.data(), s.size()); }

    template <typename T>
    void update_pod(const T& v) {
        update(&v, sizeof(T));
    }

    [[nodiscard]] std::uint64_t value() const { return state_; }

    [[nodiscard]] std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a_hex(std::string_view s) {
    Fnv1a h;
    h.update(s);
    return h.hex();
}

}  // namespace fieldscan
