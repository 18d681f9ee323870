#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rpk {

// Upper bound on worker threads used by operators and samplers. 0 restores
// the hardware default.
void set_thread_limit(std::size_t n);
std::size_t thread_limit();

// Runs body(i) for i in [0, count) over a static contiguous schedule. The
// first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace rpk
