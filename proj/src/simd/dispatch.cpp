#include <cstdlib>
#include <string>

#include "tripod/simd/ops.hpp"

namespace tripod::simd {

const Ops& active() {
  static const Ops* chosen = [] {
    const char* env = std::getenv("TRIPOD_SIMD");
    const std::string mode = env ? env : "auto";
    if (mode == "scalar") return &scalar_ops();
    const Ops* avx2 = avx2_ops();
    if (avx2 != nullptr && (mode == "auto" || mode == "avx2")) return avx2;
    return &scalar_ops();
  }();
  return *chosen;
}

}  // namespace tripod::simd
