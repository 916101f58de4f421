#include "multiroc/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

#include <omp.h>

namespace multiroc {

namespace {

int env_threads() {
    const char* raw = std::getenv("MULTIROC_THREADS");
    if (!raw) return 0;
    std::string_view s(raw);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value <= 0) return 0;
    return value;
}

}  // namespace

int thread_limit() {
    const int cap = env_threads();
    return cap > 0 ? cap : omp_get_max_threads();
}

void apply_thread_limit_from_env() {
    const int cap = env_threads();
    if (cap > 0) omp_set_num_threads(cap);
}

}  // namespace multiroc
