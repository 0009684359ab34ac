#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gmx/distribution.hpp"
#include "gmx/functional.hpp"

namespace gmx::core {

// The finite model-space grid for one run: an ordered, deduplicated list of
// distributions. Points only ever get appended (refinement round l is
// recorded per point), so indices are stable across rounds.
class Grid {
public:
    Grid();

    // Appends d unless an equal point already exists; returns the index of
    // the (new or existing) point.
    std::size_t add(Distribution d, int round);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const Distribution& operator[](std::size_t i) const { return points_[i]; }
    int round_of(std::size_t i) const { return rounds_[i]; }
    std::uint64_t id() const { return id_; }

    const std::vector<Distribution>& points() const { return points_; }

private:
    std::uint64_t id_;
    std::vector<Distribution> points_;
    std::vector<int> rounds_;
    // dedup buckets: (kind, size) -> indices
    std::map<std::pair<int, std::size_t>, std::vector<std::size_t>> buckets_;
};

// A prior supported on a grid. Construction validates the simplex and the
// moment constraints it is claimed to satisfy.
struct PriorWeights {
    std::uint64_t grid_id = 0;
    std::vector<double> weights;

    static PriorWeights validated(const Grid& grid, std::vector<double> w,
                                  const std::vector<MomentConstraint>& constraints = {});

    // Zero-extends to a grown grid (append-only refinement keeps old indices).
    PriorWeights extended_to(std::size_t size) const;
};

inline constexpr double kSimplexTol = 1e-10;
inline constexpr double kConstraintTol = 1e-9;

}  // namespace gmx::core
