#ifndef STEREOBENCH_PARALLEL_HPP
#define STEREOBENCH_PARALLEL_HPP

#include <functional>

namespace stereobench {

/// Worker count used by parallel_for. n <= 0 restores the default, which is
/// STEREOBENCH_THREADS when set and the OpenMP default otherwise. Thread
/// count never changes results: every parallel loop in the library writes
/// disjoint outputs and performs its reductions in a fixed order.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [begin, end) with a static schedule.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace stereobench

#endif  // STEREOBENCH_PARALLEL_HPP
