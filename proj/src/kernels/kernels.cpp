#include "netlineq/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace netlineq::kernels {
namespace {

const Ops& select() {
  if (const char* env = std::getenv("NETLINEQ_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
    if (std::strcmp(env, "avx2") == 0) {
      if (const Ops* ops = avx2_ops()) return *ops;
      std::fprintf(stderr,
                   "netlineq: NETLINEQ_KERNEL=avx2 requested but unsupported; "
                   "using scalar kernels\n");
      return scalar_ops();
    }
    std::fprintf(stderr, "netlineq: unknown NETLINEQ_KERNEL '%s'; ignoring\n",
                 env);
  }
  if (const Ops* ops = avx2_ops()) return *ops;
  return scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops& ops = select();
  return ops;
}

}  // namespace netlineq::kernels
