#pragma once

#include <vector>

#include "ccmtool/embedding.hpp"

namespace ccmtool {

/// Execution policy for the data-parallel kernels. Serial and parallel paths
/// must produce bit-identical results; the serial path is the reference the
/// tests compare against.
enum class Exec { serial, parallel };

/// The E+1 nearest manifold rows of one query, ascending by (distance, row).
struct NeighborSet {
    int query_index = -1;
    std::vector<int> indices;      ///< exactly E+1 rows
    std::vector<double> distances; ///< Euclidean, nondecreasing
};

/// Candidate admission rule shared by all searches: rows within
/// `exclusion_radius` of the query are skipped (the Theiler window), except
/// that `allow_self` re-admits the query row itself.
struct NeighborOptions {
    int exclusion_radius = 0;
    bool allow_self = false;
};

/// Exact E+1 nearest neighbours by full scan with partial selection.
/// Ties broken by smaller row index. Throws NotEnoughPoints when fewer than
/// E+1 admissible rows exist.
NeighborSet knn(const ShadowManifold& m, int query_index,
                const NeighborOptions& opts = {});

/// Same search restricted to candidate rows in `library_rows`.
NeighborSet knn_library(const ShadowManifold& m,
                        const std::vector<int>& library_rows, int query_index,
                        const NeighborOptions& opts = {});

/// All-queries batch; results are identical for either execution policy.
std::vector<NeighborSet> knn_batch(const ShadowManifold& m,
                                   const NeighborOptions& opts = {},
                                   Exec exec = Exec::parallel);

} // namespace ccmtool
