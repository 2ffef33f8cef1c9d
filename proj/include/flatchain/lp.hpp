#pragma once

/**
 * Dense two-phase simplex method for small and medium linear programs.
 *
 *   minimize    c^T x
 *   subject to  a_i^T x (<=, =, >=) b_i,   x >= 0
 *
 * Rows whose right-hand side is negative are negated on entry.  Columns that
 * already form a unit vector in an equality row are used as the starting basis
 * for that row, so problems like the flat-norm program start feasible without
 * any artificial variables.
 */

#include <utility>
#include <vector>

#include "flatchain/foundation.hpp"

namespace flatchain::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Row {
    std::vector<std::pair<int, double>> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

struct Problem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<Row> rows;

    void addRow(std::vector<std::pair<int, double>> terms, Sense sense, double rhs)
    {
        rows.push_back(Row{std::move(terms), sense, rhs});
    }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::IterationLimit;
    double objective = 0.0;
    Vector x;
    int iterations = 0;
};

struct Options {
    int max_iterations = 200000;
    double tolerance = 1e-9;
};

Solution solve(const Problem& problem, const Options& options = {});

const char* toString(Status status);

} // namespace flatchain::lp
