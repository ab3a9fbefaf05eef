#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rsma {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using RowC = Eigen::RowVectorXcd;
using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Uniform in [0,1) from the top 53 bits of an mt19937_64 draw. mt19937_64
/// output is bit-exact across implementations, so seeded streams are portable
/// (generator "rsma-rng v1"); std::uniform_real_distribution is not.
inline double uniform53(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Runs fn(i) for i in [0, n) over `workers` threads. workers <= 1 runs inline.
/// Order of side effects across i is unspecified; fn must be thread-safe.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

/// Worker count taken from the RSMA_WORKERS env var, else hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("RSMA_WORKERS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

}  // namespace rsma
