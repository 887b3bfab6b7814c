#pragma once

#include <cstddef>
#include <functional>

namespace spoofkit {

/// Worker count used by parallel_for. Defaults to $SPOOFKIT_THREADS when set,
/// otherwise std::thread::hardware_concurrency().
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
/// visited exactly once; bodies must only write state owned by their range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace spoofkit
