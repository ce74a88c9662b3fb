#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sohb {

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SOHB_DEFINE_ERROR(Name)                                                \
    class Name : public Error {                                               \
    public:                                                                    \
        using Error::Error;                                                    \
    }

SOHB_DEFINE_ERROR(DimensionMismatch);
SOHB_DEFINE_ERROR(NonPositiveDeterminant);
SOHB_DEFINE_ERROR(SingularInput);
SOHB_DEFINE_ERROR(InvalidAngle);
SOHB_DEFINE_ERROR(InvalidDensity);
SOHB_DEFINE_ERROR(ComplexSpectrum);
SOHB_DEFINE_ERROR(NonRotationField);
SOHB_DEFINE_ERROR(NonUnitDirection);
SOHB_DEFINE_ERROR(CflViolation);
SOHB_DEFINE_ERROR(DiffusionCflViolation);
SOHB_DEFINE_ERROR(NegativeDensity);
SOHB_DEFINE_ERROR(GridMismatch);
SOHB_DEFINE_ERROR(InvalidSetup);
SOHB_DEFINE_ERROR(ParseError);
SOHB_DEFINE_ERROR(ValidationError);
SOHB_DEFINE_ERROR(IoError);

#undef SOHB_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Thread control
//
// SOHB_THREADS caps compute parallelism.  All parallel loops use a static
// partition of the index range with disjoint writes, so results are
// bit-identical for any thread count.
// ---------------------------------------------------------------------------

namespace detail {
inline int& thread_cap() {
    static int cap = [] {
        if (const char* env = std::getenv("SOHB_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<int>(v);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }();
    return cap;
}
} // namespace detail

inline int max_threads() { return detail::thread_cap(); }

inline void set_max_threads(int n) { detail::thread_cap() = n >= 1 ? n : 1; }

/// Runs body(i) for i in [0, n).  Chunks are contiguous and fixed by the
/// thread count alone; bodies must write to disjoint locations.  The first
/// exception thrown by any worker is rethrown on the calling thread.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
    const int nt = max_threads();
    if (nt <= 1 || n < 2048) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(nt, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::mutex err_mutex;
    std::exception_ptr err;
    auto run = [&](int w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(lo + chunk, n);
        try {
            for (std::int64_t i = lo; i < hi; ++i) body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    };
    for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Summation
// ---------------------------------------------------------------------------

/// Pairwise summation; order is fixed by the data layout, independent of the
/// thread count, as the reproducibility contract requires for conserved totals.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace sohb
