#include "flatchain/lp.hpp"

#include <cmath>
#include <limits>

namespace flatchain::lp {

namespace {

class Tableau {
public:
    Tableau(int rows, int cols) : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

    int rows() const { return static_cast<int>(t_.rows()) - 1; }
    int cols() const { return static_cast<int>(t_.cols()) - 1; }
    double& at(int i, int j) { return t_(i, j); }
    double rhs(int i) const { return t_(i, cols()); }
    double& rhs(int i) { return t_(i, cols()); }
    auto objectiveRow() { return t_.row(rows()); }
    std::vector<int>& basis() { return basis_; }
    const Matrix& raw() const { return t_; }

    void pivot(int pr, int pc)
    {
        const double piv = t_(pr, pc);
        Eigen::RowVectorXd row = t_.row(pr) / piv;
        Vector col = t_.col(pc);
        col(pr) = 0.0;
        t_.noalias() -= col * row;
        t_.row(pr) = row;
        basis_[pr] = pc;
    }

    /// Reduced-cost row for cost vector `c` given the current (unit) basis.
    void setObjective(const std::vector<double>& c)
    {
        auto obj = t_.row(rows());
        obj.setZero();
        for (int j = 0; j < cols(); ++j)
            obj(j) = c[j];
        for (int i = 0; i < rows(); ++i) {
            const double cb = c[basis_[i]];
            if (cb != 0.0)
                obj -= cb * t_.row(i);
        }
    }

    Status run(const std::vector<bool>& allowed, const Options& opt, int& iterations)
    {
        const int m = rows();
        const int n = cols();
        int degenerate = 0;
        bool bland = false;
        while (iterations < opt.max_iterations) {
            auto obj = t_.row(m);
            int enter = -1;
            double best = -opt.tolerance;
            for (int j = 0; j < n; ++j) {
                if (!allowed[j])
                    continue;
                const double r = obj(j);
                if (bland) {
                    if (r < -opt.tolerance) {
                        enter = j;
                        break;
                    }
                } else if (r < best) {
                    best = r;
                    enter = j;
                }
            }
            if (enter < 0)
                return Status::Optimal;

            int leave = -1;
            double minRatio = std::numeric_limits<double>::infinity();
            double leavePivot = 0.0;
            for (int i = 0; i < m; ++i) {
                const double a = t_(i, enter);
                if (a <= opt.tolerance)
                    continue;
                const double ratio = t_(i, n) / a;
                if (ratio < minRatio - 1e-12) {
                    minRatio = ratio;
                    leave = i;
                    leavePivot = a;
                } else if (ratio <= minRatio + 1e-12) {
                    const bool better = bland ? basis_[i] < basis_[leave] : a > leavePivot;
                    if (better) {
                        leave = i;
                        leavePivot = a;
                        minRatio = std::min(minRatio, ratio);
                    }
                }
            }
            if (leave < 0)
                return Status::Unbounded;

            if (minRatio <= 1e-12) {
                if (++degenerate > 50)
                    bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
            pivot(leave, enter);
            ++iterations;
        }
        return Status::IterationLimit;
    }

private:
    Matrix t_;
    std::vector<int> basis_;
};

} // namespace

const char* toString(Status status)
{
    switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

Solution solve(const Problem& problem, const Options& options)
{
    const int n = problem.num_vars;
    const int m = static_cast<int>(problem.rows.size());
    if (static_cast<int>(problem.objective.size()) != n)
        throw ArgumentError("lp: objective length does not match the number of variables");

    // Normalized dense rows with nonnegative right-hand sides.
    Matrix a = Matrix::Zero(m, n);
    std::vector<Sense> sense(m);
    Vector b(m);
    for (int i = 0; i < m; ++i) {
        const Row& row = problem.rows[i];
        for (const auto& [j, v] : row.terms) {
            if (j < 0 || j >= n)
                throw ArgumentError("lp: variable index out of range");
            a(i, j) += v;
        }
        sense[i] = row.sense;
        b(i) = row.rhs;
        if (b(i) < 0) {
            a.row(i) *= -1.0;
            b(i) = -b(i);
            if (sense[i] == Sense::LessEqual)
                sense[i] = Sense::GreaterEqual;
            else if (sense[i] == Sense::GreaterEqual)
                sense[i] = Sense::LessEqual;
        }
    }

    // Column nonzero counts for the crash basis.
    std::vector<int> nnz(n, 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            if (a(i, j) != 0.0)
                ++nnz[j];

    int numSlack = 0;
    for (int i = 0; i < m; ++i)
        if (sense[i] != Sense::Equal)
            ++numSlack;

    std::vector<int> crash(m, -1);
    std::vector<bool> usedCrash(n, false);
    int numArtificial = 0;
    for (int i = 0; i < m; ++i) {
        if (sense[i] == Sense::LessEqual)
            continue;
        if (sense[i] == Sense::Equal) {
            for (int j = 0; j < n; ++j) {
                if (!usedCrash[j] && nnz[j] == 1 && a(i, j) > options.tolerance) {
                    crash[i] = j;
                    usedCrash[j] = true;
                    break;
                }
            }
        }
        if (crash[i] < 0)
            ++numArtificial;
    }

    const int total = n + numSlack + numArtificial;
    Tableau tab(m, total);
    std::vector<bool> artificial(total, false);
    int slack = n;
    int art = n + numSlack;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j)
            tab.at(i, j) = a(i, j);
        tab.rhs(i) = b(i);
        if (sense[i] == Sense::LessEqual) {
            tab.at(i, slack) = 1.0;
            tab.basis()[i] = slack++;
        } else {
            if (sense[i] == Sense::GreaterEqual)
                tab.at(i, slack++) = -1.0;
            if (crash[i] >= 0) {
                const double s = a(i, crash[i]);
                for (int j = 0; j <= total; ++j)
                    tab.at(i, j) /= s;
                tab.basis()[i] = crash[i];
            } else {
                tab.at(i, art) = 1.0;
                artificial[art] = true;
                tab.basis()[i] = art++;
            }
        }
    }

    Solution sol;
    int iterations = 0;
    std::vector<bool> allowed(total, true);

    if (numArtificial > 0) {
        std::vector<double> phase1(total, 0.0);
        for (int j = 0; j < total; ++j)
            if (artificial[j])
                phase1[j] = 1.0;
        tab.setObjective(phase1);
        Status st = tab.run(allowed, options, iterations);
        if (st == Status::IterationLimit) {
            sol.status = st;
            sol.iterations = iterations;
            return sol;
        }
        double infeas = 0.0;
        for (int i = 0; i < m; ++i)
            if (artificial[tab.basis()[i]])
                infeas += tab.rhs(i);
        const double scale = 1.0 + b.cwiseAbs().maxCoeff();
        if (infeas > 1e-7 * scale) {
            sol.status = Status::Infeasible;
            sol.iterations = iterations;
            return sol;
        }
        for (int i = 0; i < m; ++i) {
            if (!artificial[tab.basis()[i]])
                continue;
            int best = -1;
            double bestAbs = options.tolerance;
            for (int j = 0; j < total; ++j) {
                if (artificial[j])
                    continue;
                if (std::abs(tab.at(i, j)) > bestAbs) {
                    bestAbs = std::abs(tab.at(i, j));
                    best = j;
                }
            }
            if (best >= 0)
                tab.pivot(i, best);
        }
        for (int j = 0; j < total; ++j)
            if (artificial[j])
                allowed[j] = false;
    }

    std::vector<double> cost(total, 0.0);
    for (int j = 0; j < n; ++j)
        cost[j] = problem.objective[j];
    tab.setObjective(cost);
    sol.status = tab.run(allowed, options, iterations);
    sol.iterations = iterations;
    sol.x = Vector::Zero(n);
    for (int i = 0; i < m; ++i) {
        const int j = tab.basis()[i];
        if (j < n)
            sol.x(j) = std::max(0.0, tab.rhs(i));
    }
    sol.objective = 0.0;
    for (int j = 0; j < n; ++j)
        sol.objective += problem.objective[j] * sol.x(j);
    return sol;
}

} // namespace flatchain::lp
