#include <pthread.h>

#include <exception>

#include "ministep/engine.hpp"

namespace ministep {

namespace {

constexpr std::size_t kLargeStackBytes = std::size_t{1} << 30;

thread_local bool on_large_stack = false;

struct Job {
    const std::function<void()>* fn;
    std::exception_ptr error;
};

void* trampoline(void* arg) {
    auto* job = static_cast<Job*>(arg);
    on_large_stack = true;
    try {
        (*job->fn)();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

}  // namespace

void run_with_large_stack(const std::function<void()>& fn) {
    if (on_large_stack) {
        fn();
        return;
    }
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    Job job{&fn, nullptr};
    pthread_t thread;
    bool started = pthread_attr_setstacksize(&attr, kLargeStackBytes) == 0 &&
                   pthread_create(&thread, &attr, trampoline, &job) == 0;
    pthread_attr_destroy(&attr);
    if (!started) {
        fn();
        return;
    }
    pthread_join(thread, nullptr);
    if (job.error) std::rethrow_exception(job.error);
}

}  // namespace ministep
