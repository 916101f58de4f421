#pragma once

#include <exception>
#include <vector>

namespace multiroc {

// Threads available to the parallel kernels. Honors MULTIROC_THREADS when it
// is set to a positive integer, otherwise the OpenMP default.
int thread_limit();

// Applies MULTIROC_THREADS (if set) to the OpenMP runtime.
void apply_thread_limit_from_env();

// Exceptions must not escape an OpenMP region. Loop bodies park them by
// iteration index; afterwards the lowest-index one is rethrown, so the
// error reported does not depend on scheduling.
class LoopErrors {
public:
    explicit LoopErrors(std::size_t n) : errors_(n) {}

    template <class F>
    void run(std::size_t i, F&& body) noexcept {
        try {
            body();
        } catch (...) {
            errors_[i] = std::current_exception();
        }
    }

    void rethrow() const {
        for (const auto& e : errors_) {
            if (e) std::rethrow_exception(e);
        }
    }

private:
    std::vector<std::exception_ptr> errors_;
};

}  // namespace multiroc
