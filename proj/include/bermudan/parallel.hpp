#pragma once

#include <cstddef>

namespace bermudan {

/// Worker threads used by the path loops. Defaults to the OpenMP runtime
/// choice; BERMUDAN_THREADS overrides it. Results never depend on this value.
int thread_count();
void set_thread_count(int n);

}  // namespace bermudan
