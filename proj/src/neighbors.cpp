#include "ccmtool/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ccmtool/errors.hpp"

namespace ccmtool {

namespace {

inline bool admissible(int j, int query, const NeighborOptions& opts) {
    if (j == query) return opts.allow_self;
    return std::abs(j - query) > opts.exclusion_radius;
}

inline double sq_dist(const ShadowManifold& m, int a, int b) {
    const double* pa = m.row(a);
    const double* pb = m.row(b);
    double d2 = 0.0;
    for (int k = 0; k < m.dim(); ++k) {
        const double diff = pa[k] - pb[k];
        d2 += diff * diff;
    }
    return d2;
}

struct Candidate {
    double d2;
    int index;
    // Strict total order (distance, row index): deterministic ties.
    bool operator<(const Candidate& o) const {
        return d2 < o.d2 || (d2 == o.d2 && index < o.index);
    }
};

// Scans `candidates(f)` and keeps the k lexicographically smallest
// (d2, index) pairs in a max-heap.
template <typename Iter>
NeighborSet select_k(const ShadowManifold& m, int query, int k, Iter begin,
                     Iter end, const NeighborOptions& opts) {
    std::vector<Candidate> heap;
    heap.reserve(static_cast<std::size_t>(k) + 1);
    for (Iter it = begin; it != end; ++it) {
        const int j = *it;
        if (!admissible(j, query, opts)) continue;
        const Candidate c{sq_dist(m, query, j), j};
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    if (static_cast<int>(heap.size()) < k)
        throw NotEnoughPoints("query " + std::to_string(query) + " has " +
                              std::to_string(heap.size()) +
                              " admissible rows, needs " + std::to_string(k));
    std::sort_heap(heap.begin(), heap.end());
    NeighborSet out;
    out.query_index = query;
    out.indices.reserve(static_cast<std::size_t>(k));
    out.distances.reserve(static_cast<std::size_t>(k));
    for (const auto& c : heap) {
        out.indices.push_back(c.index);
        out.distances.push_back(std::sqrt(c.d2));
    }
    return out;
}

struct RowRangeIter {
    int i;
    int operator*() const { return i; }
    RowRangeIter& operator++() {
        ++i;
        return *this;
    }
    bool operator!=(const RowRangeIter& o) const { return i != o.i; }
};

} // namespace

NeighborSet knn(const ShadowManifold& m, int query_index,
                const NeighborOptions& opts) {
    if (query_index < 0 || query_index >= m.rows())
        throw IndexOutOfRange("query row " + std::to_string(query_index));
    return select_k(m, query_index, m.dim() + 1, RowRangeIter{0},
                    RowRangeIter{m.rows()}, opts);
}

NeighborSet knn_library(const ShadowManifold& m,
                        const std::vector<int>& library_rows, int query_index,
                        const NeighborOptions& opts) {
    if (query_index < 0 || query_index >= m.rows())
        throw IndexOutOfRange("query row " + std::to_string(query_index));
    for (const int r : library_rows)
        if (r < 0 || r >= m.rows())
            throw IndexOutOfRange("library row " + std::to_string(r));
    return select_k(m, query_index, m.dim() + 1, library_rows.begin(),
                    library_rows.end(), opts);
}

std::vector<NeighborSet> knn_batch(const ShadowManifold& m,
                                   const NeighborOptions& opts, Exec exec) {
    std::vector<NeighborSet> out(static_cast<std::size_t>(m.rows()));
    if (exec == Exec::serial) {
        for (int q = 0; q < m.rows(); ++q)
            out[static_cast<std::size_t>(q)] = knn(m, q, opts);
        return out;
    }
    // Exceptions may not escape an OpenMP region; capture and rethrow.
    std::exception_ptr err;
#pragma omp parallel for schedule(static)
    for (int q = 0; q < m.rows(); ++q) {
        try {
            out[static_cast<std::size_t>(q)] = knn(m, q, opts);
        } catch (...) {
#pragma omp critical(ccmtool_knn_batch_err)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace ccmtool
