#include "ipu/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ipu {

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x1f0c0d1au};
    Rng rng(0);
    rng.engine_.seed(seq);
    return rng;
}

double Rng::uniform() {
    // 53 random bits, offset by half an ulp step: (k + 0.5) / 2^53.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    // Reject the top partial bucket so x % n is unbiased.
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x < limit) return static_cast<std::size_t>(x % bound);
    }
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double x = 0.0, y = 0.0, s = 0.0;
    do {
        x = 2.0 * uniform() - 1.0;
        y = 2.0 * uniform() - 1.0;
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = y * f;
    has_spare_ = true;
    return x * f;
}

double Rng::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1 and correct with U^(1/shape).
        const double g = gamma(shape + 1.0, rate);
        return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0, v = 0.0;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double Rng::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

unsigned default_thread_count() {
    return std::max(1u, std::thread::hardware_concurrency());
}

void for_each_block(std::size_t count, std::uint64_t seed, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, Rng&)>& fn) {
    const std::size_t blocks = (count + kBlockRows - 1) / kBlockRows;
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(blocks, 1)));

    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * kBlockRows;
        const std::size_t end = std::min(count, begin + kBlockRows);
        Rng rng = Rng::stream(seed, b);
        fn(begin, end, rng);
    };

    if (threads <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t b = next++; b < blocks; b = next++) {
                try {
                    run_block(b);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ipu
