#include <cstdlib>
#include <string_view>

#include "rilco/kernels.hpp"

namespace rilco::kernels {

const KernelTable& active() noexcept {
  static const KernelTable& chosen = []() -> const KernelTable& {
    const char* force = std::getenv("RIL_KERNELS");
    if (force != nullptr && std::string_view(force) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

}  // namespace rilco::kernels
