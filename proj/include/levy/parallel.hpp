#pragma once

#include <cstddef>
#include <functional>

namespace levy {

// Worker count used by node-parallel loops (default 1; the CLI sets it from --jobs).
void set_jobs(int n);
int jobs();

// Calls body(begin, end) over a static partition of [0, n); results must not depend on the partition.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace levy
