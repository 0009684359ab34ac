#include "gmx/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gmx::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

namespace {

struct Selected {
    const Ops* table;
    const char* name;
};

Selected select_backend() {
    const char* env = std::getenv("GMX_KERNELS");
    const bool forced = env != nullptr && *env != '\0';
#if defined(__x86_64__) || defined(_M_X64)
    if (forced ? std::strcmp(env, "avx2") == 0 : __builtin_cpu_supports("avx2"))
        return {&avx2_ops(), "avx2"};
#endif
#if defined(__aarch64__)
    if (!forced || std::strcmp(env, "neon") == 0) return {&neon_ops(), "neon"};
#endif
    return {&scalar_ops(), "scalar"};
}

const Selected& selected() {
    static const Selected s = select_backend();
    return s;
}

}  // namespace

const Ops& ops() { return *selected().table; }

const char* backend_name() { return selected().name; }

}  // namespace gmx::kernels
