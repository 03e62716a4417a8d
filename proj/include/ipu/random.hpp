#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace ipu {

/// Random stream used by every sampler in the library.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The distribution algorithms are implemented here rather than taken from
/// <random>, so a given seed yields the same variates on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream number `index` derived from a master seed.
    static Rng stream(std::uint64_t seed, std::uint64_t index);

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform();

    /// Uniform integer on {0, ..., n-1}.
    std::size_t index(std::size_t n);

    /// Standard normal (Marsaglia polar method).
    double normal();

    /// Gamma with the given shape and rate (Marsaglia-Tsang squeeze).
    double gamma(double shape, double rate = 1.0);

    /// Beta(a, b) as a ratio of gamma variates.
    double beta(double a, double b);

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Rows per independently seeded simulation block. Block b of a run with
/// master seed s always uses Rng::stream(s, b), so results do not depend on
/// the number of worker threads.
inline constexpr std::size_t kBlockRows = std::size_t{1} << 16;

/// Worker count used when a caller passes 0.
unsigned default_thread_count();

/// Runs fn(block_begin, block_end, rng) over [0, count) in kBlockRows chunks,
/// spread over `threads` workers. fn must only write to rows in its block.
void for_each_block(std::size_t count, std::uint64_t seed, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, Rng&)>& fn);

}  // namespace ipu
