#ifndef SSMSHRINK_SRC_PARALLEL_HPP
#define SSMSHRINK_SRC_PARALLEL_HPP

#include <algorithm>
#include <future>
#include <vector>

namespace ssmshrink::detail
{

/// Calls fn(i) for i in [0, count), on at most `threads` threads. Exceptions
/// propagate from the lowest failing index.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn)
{
    if (threads <= 1 || count <= 1)
    {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::future<void>> jobs;
    jobs.reserve(workers);
    for (int w = 0; w < workers; ++w)
    {
        jobs.push_back(std::async(std::launch::async, [&fn, w, workers, count] {
            for (int i = w; i < count; i += workers)
                fn(i);
        }));
    }
    for (auto& job : jobs)
        job.get();
}

} // namespace ssmshrink::detail

#endif // SSMSHRINK_SRC_PARALLEL_HPP
