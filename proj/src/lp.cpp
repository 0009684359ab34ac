#include "gmx/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"

namespace gmx::lp {

namespace {

constexpr double kPivotTol = 1e-11;

// Dense tableau in standard minimization form. Columns: structural variables
// (pi, slacks), then artificials, then the right-hand side.
class Tableau {
public:
    Tableau(std::size_t nrows, std::size_t ncols) : ncols_(ncols), data_(nrows * ncols, 0.0) {}

    double* row(std::size_t i) { return data_.data() + i * ncols_; }
    const double* row(std::size_t i) const { return data_.data() + i * ncols_; }
    std::size_t cols() const { return ncols_; }

private:
    std::size_t ncols_;
    std::vector<double> data_;
};

struct Simplex {
    std::size_t n_pi, n_slack, n_art, n_struct, rhs_col, m;
    Tableau body;                    // m constraint rows
    std::vector<double> obj;         // reduced-cost row, length cols
    double obj_rhs = 0.0;            // negative of current objective value
    std::vector<std::size_t> basis;  // basic variable per row
    std::vector<char> blocked;       // columns barred from entering

    Simplex(std::size_t npi, std::size_t nslack, std::size_t nart, std::size_t rows)
        : n_pi(npi),
          n_slack(nslack),
          n_art(nart),
          n_struct(npi + nslack),
          rhs_col(npi + nslack + nart),
          m(rows),
          body(rows, npi + nslack + nart + 1),
          obj(npi + nslack + nart + 1, 0.0),
          basis(rows, 0),
          blocked(npi + nslack + nart + 1, 0) {}

    void pivot(std::size_t prow, std::size_t pcol) {
        double* pr = body.row(prow);
        const double inv = 1.0 / pr[pcol];
        kernels::scale(inv, pr, body.cols());
        pr[pcol] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == prow) continue;
            double* r = body.row(i);
            const double f = r[pcol];
            if (f != 0.0) {
                kernels::axpy(-f, pr, r, body.cols());
                r[pcol] = 0.0;
            }
        }
        const double f = obj[pcol];
        if (f != 0.0) {
            kernels::axpy(-f, pr, obj.data(), obj.size());
            obj[pcol] = 0.0;
        }
        basis[prow] = pcol;
    }

    // Bland's rule: enter the lowest-index improving column, leave by the
    // minimum ratio with ties broken by the lowest basis index.
    bool step() {
        std::size_t enter = rhs_col;
        for (std::size_t j = 0; j < rhs_col; ++j) {
            if (!blocked[j] && obj[j] < -kLpTol) {
                enter = j;
                break;
            }
        }
        if (enter == rhs_col) return false;  // optimal
        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double a = body.row(i)[enter];
            if (a > kPivotTol) {
                const double ratio = body.row(i)[rhs_col] / a;
                if (ratio < best_ratio - 1e-15 ||
                    (ratio < best_ratio + 1e-15 && (leave == m || basis[i] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave == m) throw Error("simplex: unbounded (cannot happen on the simplex polytope)");
        pivot(leave, enter);
        return true;
    }

    void run() {
        while (step()) {
        }
    }

    // Rebuilds the reduced-cost row for costs c over structural columns.
    void load_costs(const std::vector<double>& c) {
        std::fill(obj.begin(), obj.end(), 0.0);
        std::copy(c.begin(), c.end(), obj.begin());
        obj_rhs = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t b = basis[i];
            const double cb = b < c.size() ? c[b] : 0.0;
            if (cb != 0.0) kernels::axpy(-cb, body.row(i), obj.data(), obj.size());
        }
        for (std::size_t i = 0; i < m; ++i) obj[basis[i]] = 0.0;
    }

    double objective_value() const { return -obj[rhs_col]; }
};

std::vector<std::size_t> tight_rows(const LpProblem& p, const std::vector<double>& pi) {
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < p.rows.size(); ++k) {
        const double lhs = kernels::dot(p.rows[k].data(), pi.data(), pi.size());
        if (lhs > p.bounds[k] - 1e-7) active.push_back(k);
    }
    return active;
}

}  // namespace

LpProblem LpProblem::from_grid(std::vector<double> objective,
                               const std::vector<core::MomentConstraint>& constraints,
                               const core::Grid& grid) {
    LpProblem p;
    p.objective = std::move(objective);
    p.rows.reserve(constraints.size());
    p.bounds.reserve(constraints.size());
    for (const auto& k : constraints) {
        p.rows.push_back(core::constraint_row(k, grid));
        p.bounds.push_back(k.bound);
    }
    p.validate();
    return p;
}

void LpProblem::validate() const {
    if (objective.empty()) throw InvalidArgument("lp: no variables");
    for (double v : objective)
        if (!std::isfinite(v)) throw InvalidArgument("lp: non-finite objective entry");
    if (rows.size() != bounds.size()) throw InvalidArgument("lp: rows/bounds size mismatch");
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].size() != objective.size()) throw InvalidArgument("lp: row length mismatch");
        for (double v : rows[k])
            if (!std::isfinite(v)) throw InvalidArgument("lp: non-finite row entry");
        if (!std::isfinite(bounds[k])) throw InvalidArgument("lp: non-finite bound");
    }
}

LpSolution solve_least_favorable(const LpProblem& p) {
    p.validate();
    const std::size_t n = p.objective.size();
    const std::size_t nk = p.rows.size();
    const std::size_t m = nk + 1;

    // Row signs: flip moment rows with negative bounds so every rhs is
    // nonnegative; flipped rows get an artificial, unflipped rows a slack
    // basis. The simplex-sum equality row always needs an artificial.
    std::vector<int> flip(nk, 0);
    std::size_t n_art = 1;
    for (std::size_t k = 0; k < nk; ++k) {
        if (p.bounds[k] < 0.0) {
            flip[k] = 1;
            ++n_art;
        }
    }

    Simplex s(n, nk, n_art, m);

    // Row 0: sum pi = 1.
    {
        double* r = s.body.row(0);
        for (std::size_t j = 0; j < n; ++j) r[j] = 1.0;
        r[s.rhs_col] = 1.0;
    }
    std::size_t art = s.n_struct;
    s.body.row(0)[art] = 1.0;
    s.basis[0] = art;
    ++art;

    for (std::size_t k = 0; k < nk; ++k) {
        double* r = s.body.row(k + 1);
        const double sign = flip[k] ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) r[j] = sign * p.rows[k][j];
        r[n + k] = sign;  // slack
        r[s.rhs_col] = sign * p.bounds[k];
        if (flip[k]) {
            r[art] = 1.0;
            s.basis[k + 1] = art;
            ++art;
        } else {
            s.basis[k + 1] = n + k;
        }
    }

    // Phase 1: minimize the artificial sum.
    {
        std::vector<double> c(s.rhs_col, 0.0);
        for (std::size_t j = s.n_struct; j < s.rhs_col; ++j) c[j] = 1.0;
        s.load_costs(c);
        s.run();
        if (s.objective_value() > kLpTol)
            throw Infeasible("no prior on this grid satisfies the moment constraints");
        // Drive leftover artificials out of the (degenerate) basis.
        for (std::size_t i = 0; i < s.m; ++i) {
            if (s.basis[i] < s.n_struct) continue;
            std::size_t j = 0;
            for (; j < s.n_struct; ++j)
                if (std::fabs(s.body.row(i)[j]) > kPivotTol) break;
            if (j < s.n_struct) s.pivot(i, j);
            // A row with no structural pivot is redundant; its artificial
            // stays basic at zero and the column stays blocked below.
        }
        for (std::size_t j = s.n_struct; j < s.rhs_col; ++j) s.blocked[j] = 1;
    }

    // Phase 2: maximize objective . pi, i.e. minimize the negation.
    {
        std::vector<double> c(s.rhs_col, 0.0);
        for (std::size_t j = 0; j < n; ++j) c[j] = -p.objective[j];
        s.load_costs(c);
        s.run();
    }

    LpSolution sol;
    sol.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < s.m; ++i) {
        if (s.basis[i] < n) {
            double v = s.body.row(i)[s.rhs_col];
            if (v < 0.0) v = 0.0;
            sol.weights[s.basis[i]] = v;
        }
    }
    sol.value = kernels::dot(p.objective.data(), sol.weights.data(), n);
    sol.active_rows = tight_rows(p, sol.weights);
    return sol;
}

LpSolution brute_force_lfp(const LpProblem& p) {
    p.validate();
    const std::size_t n = p.objective.size();
    const std::size_t nk = p.rows.size();
    if (n > 10 || nk > 4) throw SizeLimit("brute_force_lfp: instance too large");

    // A vertex of {pi >= 0, sum pi = 1, A pi <= c} has support size
    // |T| + 1 where T indexes the tight moment rows. Enumerate supports and
    // tight sets, solve the square system, keep the best feasible point.
    bool found = false;
    LpSolution best;
    best.value = -std::numeric_limits<double>::infinity();

    std::vector<std::size_t> support;
    std::vector<std::size_t> tight;

    const auto try_vertex = [&]() {
        const std::size_t sz = support.size();
        // System: sum over support = 1; tight rows restricted to support.
        std::vector<std::vector<double>> a(sz, std::vector<double>(sz + 1, 0.0));
        for (std::size_t j = 0; j < sz; ++j) a[0][j] = 1.0;
        a[0][sz] = 1.0;
        for (std::size_t t = 0; t < tight.size(); ++t) {
            for (std::size_t j = 0; j < sz; ++j) a[t + 1][j] = p.rows[tight[t]][support[j]];
            a[t + 1][sz] = p.bounds[tight[t]];
        }
        // Gaussian elimination with partial pivoting.
        for (std::size_t col = 0; col < sz; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < sz; ++i)
                if (std::fabs(a[i][col]) > std::fabs(a[piv][col])) piv = i;
            if (std::fabs(a[piv][col]) < 1e-12) return;  // singular: not a vertex
            std::swap(a[col], a[piv]);
            for (std::size_t i = 0; i < sz; ++i) {
                if (i == col) continue;
                const double f = a[i][col] / a[col][col];
                if (f != 0.0)
                    for (std::size_t j = col; j <= sz; ++j) a[i][j] -= f * a[col][j];
            }
        }
        std::vector<double> pi(n, 0.0);
        for (std::size_t j = 0; j < sz; ++j) {
            const double v = a[j][sz] / a[j][j];
            if (v < -1e-10) return;
            pi[support[j]] = v < 0.0 ? 0.0 : v;
        }
        for (std::size_t k = 0; k < nk; ++k) {
            const double lhs = kernels::dot(p.rows[k].data(), pi.data(), n);
            if (lhs > p.bounds[k] + 1e-10) return;
        }
        const double value = kernels::dot(p.objective.data(), pi.data(), n);
        if (!found || value > best.value + 1e-15) {
            found = true;
            best.weights = std::move(pi);
            best.value = value;
        }
    };

    const auto enum_tight = [&](auto&& self, std::size_t from, std::size_t want) -> void {
        if (want == 0) {
            try_vertex();
            return;
        }
        for (std::size_t k = from; k + want <= nk + 0; ++k) {
            if (k >= nk) break;
            tight.push_back(k);
            self(self, k + 1, want - 1);
            tight.pop_back();
        }
    };

    const auto enum_support = [&](auto&& self, std::size_t from, std::size_t want) -> void {
        if (want == 0) {
            enum_tight(enum_tight, 0, support.size() - 1);
            return;
        }
        for (std::size_t j = from; j + want <= n; ++j) {
            support.push_back(j);
            self(self, j + 1, want - 1);
            support.pop_back();
        }
    };

    for (std::size_t sz = 1; sz <= std::min(n, nk + 1); ++sz)
        enum_support(enum_support, 0, sz);

    if (!found) throw Infeasible("brute force: no feasible vertex");
    best.active_rows = tight_rows(p, best.weights);
    return best;
}

}  // namespace gmx::lp
