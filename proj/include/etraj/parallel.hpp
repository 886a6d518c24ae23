#pragma once

#include <functional>

namespace etraj {

// Worker cap for all data-parallel kernels. 0 restores the hardware default.
void set_num_threads(int n);
int num_threads();

// Runs body(i) for every i in [begin, end), split into contiguous chunks across
// workers. Bodies must only write state owned by their index.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

// Sum of term(i) over [begin, end). Terms are evaluated in parallel and then
// added in index order, so the result does not depend on the worker count.
double ordered_sum(int begin, int end, const std::function<double(int)>& term);

}  // namespace etraj
