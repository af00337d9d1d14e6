#include "viprom/core/kernels.hpp"

#include <atomic>

namespace viprom::core {

namespace {
std::atomic<bool> g_parallel{true};
}

bool parallel_kernels() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_kernels(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

}  // namespace viprom::core
