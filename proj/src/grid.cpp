#include "gmx/grid.hpp"

#include <atomic>
#include <cmath>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"

namespace gmx::core {

namespace {
std::atomic<std::uint64_t> next_grid_id{1};
}

Grid::Grid() : id_(next_grid_id.fetch_add(1)) {}

std::size_t Grid::add(Distribution d, int round) {
    const std::size_t dim =
        d.is_point_support() ? d.points().size() : d.probs().size();
    auto& bucket = buckets_[{static_cast<int>(d.kind()), dim}];
    for (std::size_t idx : bucket)
        if (points_[idx].equals(d)) return idx;
    const std::size_t idx = points_.size();
    points_.push_back(std::move(d));
    rounds_.push_back(round);
    bucket.push_back(idx);
    return idx;
}

PriorWeights PriorWeights::validated(const Grid& grid, std::vector<double> w,
                                     const std::vector<MomentConstraint>& constraints) {
    if (w.size() != grid.size()) throw GridMismatch("prior length does not match grid");
    double total = 0.0;
    for (double& x : w) {
        if (!(x >= -kSimplexTol)) throw InvalidArgument("prior: negative weight");
        if (x < 0.0) x = 0.0;
        total += x;
    }
    if (std::fabs(total - 1.0) > kSimplexTol)
        throw InvalidArgument("prior: weights sum to " + std::to_string(total));
    for (const auto& k : constraints) {
        const auto row = constraint_row(k, grid);
        const double lhs = kernels::dot(row.data(), w.data(), w.size());
        if (lhs > k.bound + kConstraintTol)
            throw InvalidArgument("prior violates constraint: " + k.label);
    }
    PriorWeights p;
    p.grid_id = grid.id();
    p.weights = std::move(w);
    return p;
}

PriorWeights PriorWeights::extended_to(std::size_t size) const {
    if (size < weights.size()) throw GridMismatch("cannot shrink a prior");
    PriorWeights p = *this;
    p.weights.resize(size, 0.0);
    return p;
}

}  // namespace gmx::core
