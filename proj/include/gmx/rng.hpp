#pragma once

#include <cmath>
#include <cstdint>

namespace gmx::rng {

// splitmix64 finalizer; the basis for both stream derivation and generation.
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One independent generator. Streams are never shared: every (grid point,
// replication, stage) address derives its own, so evaluation order and
// thread count cannot change any draw.
class Stream {
public:
    explicit Stream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); rejects exact zeros.
    double next_open() {
        double u;
        do {
            u = next_unit();
        } while (u == 0.0);
        return u;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via the polar method.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Marsaglia-Tsang gamma sampler, shape > 0, scale 1.
    double next_gamma(double shape) {
        if (shape < 1.0) {
            const double u = next_open();
            return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::uint64_t index_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stage tags partition the master seed's address space between unrelated
// consumers of randomness.
enum class Stage : std::uint64_t {
    risk_stage_a = 1,
    risk_stage_b = 2,
    solver_max = 3,
    solver_grad = 4,
    grid_gen = 5,
    mcmc_chain = 6,
    mcmc_target = 7,
    evaluation = 8,
    init = 9,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix(master ^ 0x6a09e667f3bcc909ULL);
    s = mix(s ^ stage);
    s = mix(s ^ a);
    s = mix(s ^ b);
    s = mix(s ^ c);
    return s;
}

inline Stream derive(std::uint64_t master, Stage stage, std::uint64_t a = 0, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
    return Stream(derive_seed(master, static_cast<std::uint64_t>(stage), a, b, c));
}

// Addressing rule for risk evaluation: one stream per
// (grid point, replication, stage) triple. rep_offset shifts the replication
// index so a run can be split into consecutive batches.
struct RngSpec {
    std::uint64_t master_seed = 0;
    Stage stage = Stage::risk_stage_a;
    std::uint64_t rep_offset = 0;

    Stream replication_stream(std::uint64_t point_index, std::uint64_t replication) const {
        return derive(master_seed, stage, point_index, rep_offset + replication);
    }

    RngSpec with_stage(Stage s) const { return {master_seed, s, rep_offset}; }
    RngSpec with_offset(std::uint64_t off) const { return {master_seed, stage, off}; }
};

}  // namespace gmx::rng
