#include "vst/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "vst/errors.hpp"

namespace vst::kernels {

#ifndef VST_WITH_AVX2
const Ops* avx2_ops()
{
    return nullptr;
}
#endif

bool avx2_available()
{
#if defined(__x86_64__) || defined(_M_X64)
    return avx2_ops() != nullptr && __builtin_cpu_supports("avx2") &&
           __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Ops* resolve(const std::string& name)
{
    if (name == "scalar")
        return &scalar_ops();
    if (name == "avx2") {
        if (!avx2_available())
            throw ConfigError("backend 'avx2' not available on this machine");
        return avx2_ops();
    }
    if (name == "auto")
        return avx2_available() ? avx2_ops() : &scalar_ops();
    throw ConfigError("unknown backend '" + name +
                      "' (expected scalar, avx2, or auto)");
}

std::atomic<const Ops*>& slot()
{
    static std::atomic<const Ops*> s{nullptr};
    return s;
}

} // namespace

const Ops& active()
{
    const Ops* ops = slot().load(std::memory_order_acquire);
    if (!ops) {
        const char* env = std::getenv("VST_BACKEND");
        ops = resolve(env ? env : "auto");
        slot().store(ops, std::memory_order_release);
    }
    return *ops;
}

void select_backend(const std::string& name)
{
    slot().store(resolve(name), std::memory_order_release);
}

const char* active_name()
{
    return active().name;
}

} // namespace vst::kernels
