#pragma once

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hypershell {

// Execution mode for the data-parallel kernels (Picard sweeps, Gram
// assembly, chart column marching). Every kernel assigns each output element
// to exactly one task and performs reductions in a fixed order, so serial and
// parallel runs produce bit-identical results; the serial path is kept as the
// reference implementation for tests and benchmarks.
enum class ExecMode { serial, parallel };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// OpenMP terminates the program when an exception escapes a worker, so loop
// bodies that may throw (surface evaluations outside their domain, for
// instance) run through this guard and the first captured exception is
// rethrown after the join.
class ParallelGuard {
 public:
  template <class F>
  void run(F&& body) noexcept {
    try {
      body();
    } catch (...) {
      const std::lock_guard<std::mutex> lock(mutex_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr first_;
};

}  // namespace hypershell

#ifdef _OPENMP
#define HS_PRAGMA(x) _Pragma(#x)
#define HS_PARALLEL_FOR_IF(cond) HS_PRAGMA(omp parallel for schedule(static) if (cond))
#else
#define HS_PARALLEL_FOR_IF(cond)
#endif
