#pragma once

#include <cstddef>
#include <functional>

namespace frontal {

/// Worker count used by parallel_for; 0 means hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count). Work is claimed dynamically, so bodies
/// must write only to slot i of their outputs; the first exception thrown by
/// any body (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace frontal
