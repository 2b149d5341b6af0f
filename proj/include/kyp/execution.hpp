#pragma once

#include <exception>
#include <vector>

namespace kyp {

/// Execution policy for the independent-task kernels (per-parameter Lyapunov
/// solves, frequency sweeps). `serial` is the reference path; `parallel`
/// distributes tasks with OpenMP. Every task writes its own output slot, so
/// both paths produce bitwise identical results.
enum class Exec { serial, parallel };

const char* to_string(Exec exec);

/// Runs fn(0) … fn(count−1). On failure the exception of the lowest failing
/// index is rethrown after all tasks have finished.
template <class Fn>
void for_each_index(int count, Exec exec, Fn&& fn) {
  if (exec == Exec::serial || count < 2) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    try {
      fn(k);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace kyp
