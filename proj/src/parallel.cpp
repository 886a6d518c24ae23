#include "etraj/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace etraj {

namespace {

std::atomic<int> g_threads{0};

int hardware_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void set_num_threads(int n) { g_threads.store(std::max(0, n)); }

int num_threads() {
    const int n = g_threads.load();
    return n > 0 ? n : hardware_threads();
}

void parallel_for(int begin, int end, const std::function<void(int)>& body) {
    const int count = end - begin;
    if (count <= 0) {
        return;
    }
    const int workers = std::min(num_threads(), count);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) {
            body(i);
        }
        return;
    }
    const int chunk = (count + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) {
            break;
        }
        pool.emplace_back([&body, lo, hi] {
            for (int i = lo; i < hi; ++i) {
                body(i);
            }
        });
    }
    for (int i = begin; i < std::min(end, begin + chunk); ++i) {
        body(i);
    }
}

double ordered_sum(int begin, int end, const std::function<double(int)>& term) {
    if (end <= begin) {
        return 0.0;
    }
    std::vector<double> parts(static_cast<std::size_t>(end - begin));
    parallel_for(begin, end, [&](int i) { parts[static_cast<std::size_t>(i - begin)] = term(i); });
    double total = 0.0;
    for (double p : parts) {
        total += p;
    }
    return total;
}

}  // namespace etraj
