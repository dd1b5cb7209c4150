#include "psd/kernels.hpp"

#include <atomic>
#include <string>

#include "psd/errors.hpp"

namespace psd::kernels {

const Ops* avx2_ops_impl();  // kernels_avx2.cpp

bool avx2_available() {
#if defined(PSD_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported && avx2_ops_impl() != nullptr;
#else
  return false;
#endif
}

const Ops* avx2_ops() { return avx2_available() ? avx2_ops_impl() : nullptr; }

namespace {

std::atomic<const Ops*>& active_slot() {
  static std::atomic<const Ops*> slot{avx2_available()
                                          ? avx2_ops_impl()
                                          : &scalar_ops()};
  return slot;
}

}  // namespace

const Ops& ops() { return *active_slot().load(std::memory_order_relaxed); }

Backend active_backend() {
  return active_slot().load(std::memory_order_relaxed) == &scalar_ops()
             ? Backend::Scalar
             : Backend::Avx2;
}

void set_backend(Backend b) {
  if (b == Backend::Scalar) {
    active_slot().store(&scalar_ops(), std::memory_order_relaxed);
    return;
  }
  const Ops* avx2 = avx2_ops();
  if (avx2 == nullptr)
    throw ConfigError("kernel backend avx2 is not available on this machine");
  active_slot().store(avx2, std::memory_order_relaxed);
}

void select_backend(std::string_view name) {
  if (name == "auto") {
    active_slot().store(avx2_available() ? avx2_ops_impl() : &scalar_ops(),
                        std::memory_order_relaxed);
  } else if (name == "scalar") {
    set_backend(Backend::Scalar);
  } else if (name == "avx2") {
    set_backend(Backend::Avx2);
  } else {
    throw ConfigError("unknown kernel backend: " + std::string(name));
  }
}

}  // namespace psd::kernels
