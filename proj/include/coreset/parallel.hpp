#pragma once

#include <cstddef>
#include <functional>

namespace coreset {

/// Worker count: hardware concurrency capped by CORESET_KIT_THREADS when set.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index must write only its own output slot,
/// so results are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace coreset
