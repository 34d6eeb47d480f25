#include "sketchy/alloc_probe.hpp"

#include <malloc.h>

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstdlib>

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void __libc_free(void*);
}

namespace {

std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};
std::atomic<std::size_t> g_baseline{0};
std::atomic<std::size_t> g_largest{0};

void raise_max(std::atomic<std::size_t>& slot, std::size_t value) {
  std::size_t prev = slot.load(std::memory_order_relaxed);
  while (value > prev && !slot.compare_exchange_weak(prev, value, std::memory_order_relaxed)) {
  }
}

void on_alloc(void* p, std::size_t requested) {
  if (p == nullptr) return;
  const std::size_t sz = malloc_usable_size(p);
  const std::size_t now = g_current.fetch_add(sz, std::memory_order_relaxed) + sz;
  raise_max(g_peak, now);
  raise_max(g_largest, requested);
}

void on_free(void* p) {
  if (p == nullptr) return;
  g_current.fetch_sub(malloc_usable_size(p), std::memory_order_relaxed);
}

}  // namespace

extern "C" {

void* malloc(std::size_t size) {
  void* p = __libc_malloc(size);
  on_alloc(p, size);
  return p;
}

void* calloc(std::size_t count, std::size_t size) {
  void* p = __libc_calloc(count, size);
  on_alloc(p, count * size);
  return p;
}

void* realloc(void* old, std::size_t size) {
  const std::size_t old_size = old != nullptr ? malloc_usable_size(old) : 0;
  void* p = __libc_realloc(old, size);
  if (p == nullptr) return p;
  g_current.fetch_sub(old_size, std::memory_order_relaxed);
  on_alloc(p, size);
  return p;
}

void free(void* p) {
  on_free(p);
  __libc_free(p);
}

void* memalign(std::size_t alignment, std::size_t size) {
  void* p = __libc_memalign(alignment, size);
  on_alloc(p, size);
  return p;
}

void* aligned_alloc(std::size_t alignment, std::size_t size) { return memalign(alignment, size); }

int posix_memalign(void** out, std::size_t alignment, std::size_t size) {
  void* p = memalign(alignment, size);
  if (p == nullptr) return ENOMEM;
  *out = p;
  return 0;
}

}  // extern "C"

namespace sketchy::alloc_probe {

bool active() {
  const std::size_t before = g_current.load();
  void* volatile p = std::malloc(64);
  const bool seen = g_current.load() > before;
  std::free(p);
  return seen;
}

void reset() {
  const std::size_t now = g_current.load();
  g_baseline.store(now);
  g_peak.store(now);
  g_largest.store(0);
}

std::size_t current_bytes() { return g_current.load(); }
std::size_t peak_bytes() { return g_peak.load(); }
std::size_t peak_above_baseline() {
  const std::size_t peak = g_peak.load();
  const std::size_t base = g_baseline.load();
  return peak > base ? peak - base : 0;
}
std::size_t largest_allocation() { return g_largest.load(); }

}  // namespace sketchy::alloc_probe
