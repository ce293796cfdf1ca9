// Copyright 2026 The TAL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tal {

/// Raised for every contract violation in the library. The message names the
/// offending operation and the values involved.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Keeps large tensor buffers on the heap between allocations instead of
/// returning them to the OS each time (glibc only; a no-op elsewhere).
/// Training allocates and frees the same multi-megabyte buffers every step,
/// so executables call this once at startup.
void tune_allocator();

/// Derives an independent 64-bit stream seed from a parent seed and a salt
/// (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// 64-bit FNV-1a, used for model and config fingerprints.
class Fnv1a {
public:
    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ ^= bytes[i];
            hash_ *= 0x100000001B3ULL;
        }
    }
    void update(const std::string& text) { update(text.data(), text.size()); }
    std::uint64_t digest() const { return hash_; }
    std::string hex() const;

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace tal
