#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace kinecluster {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Error categories. The CLI maps these onto process exit codes
// (validation=2, solver=3, clustering=4, io=5).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ClusteringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape of a regular grid whose nodes are stored row-major (row = y index,
// row 0 at physical y=0).
struct GridShape {
    int rows = 0;
    int cols = 0;

    bool valid() const { return rows > 0 && cols > 0; }
    int size() const { return rows * cols; }
    int index(int row, int col) const { return row * cols + col; }
    bool operator==(const GridShape&) const = default;
};

// Thread cap: KINECLUSTER_THREADS wins over hardware concurrency.
inline int max_threads() {
    static const int cap = [] {
        if (const char* env = std::getenv("KINECLUSTER_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) return v;
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? static_cast<int>(hc) : 1;
    }();
    return cap;
}

namespace detail {
inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

// Runs fn(begin, end) over deterministic contiguous chunks of [0, n).
// Workers must write to disjoint slots; the chunking (and therefore any
// per-chunk reduction order) does not depend on thread scheduling. Nested
// calls run serially instead of oversubscribing.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
    if (n == 0) return;
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (nt <= 1 || detail::in_parallel_region()) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, &first_error, &error_mutex, b, e] {
            detail::in_parallel_region() = true;
            try {
                fn(b, e);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    parallel_chunks(n, [&fn](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

}  // namespace kinecluster
