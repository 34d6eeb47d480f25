#pragma once

// Heap accounting for storage tests. Linking the sketchy_alloc_probe library
// interposes the C allocator (glibc only) and counts live bytes, the peak
// since the last reset, and the largest single block requested.

#include <cstddef>

namespace sketchy::alloc_probe {

bool active();
void reset();
std::size_t current_bytes();
std::size_t peak_bytes();
// Peak minus the live bytes at the last reset.
std::size_t peak_above_baseline();
std::size_t largest_allocation();

}  // namespace sketchy::alloc_probe
