#pragma once

#include <atomic>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>
#include <string>
#include <string_view>

namespace route {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Derives an independent stream seed (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform integer in [0, n) by rejection sampling; identical on every platform.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = uniform_below(rng, i);
        std::swap(items[i - 1], items[j]);
    }
}

/// Calls fn(i) for every i in [0, n) on up to `workers` threads. The first
/// exception thrown by fn is rethrown after all workers finish. When `stop` is
/// set, no new indices are started.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn,
                  const std::atomic<bool>* stop = nullptr);

}  // namespace route
