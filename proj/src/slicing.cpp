#include "flatchain/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "flatchain/errors.hpp"
#include "flatchain/lp.hpp"
#include "flatchain/optimize.hpp"

namespace flatchain {

namespace {

/// Halfspace a.t <= b in the local coordinates of `p` equivalent to c.x <= r.
/// nullopt when c is constant on the plane; `constant` receives its value.
std::optional<Halfspace> localHalfspace(const OrientedPolytope& p, const Vector& c, double r, double* constant)
{
    const Matrix& e = p.frame().key.basis();
    Vector a = e.transpose() * c;
    const double base = c.dot(p.frame().origin);
    if (a.norm() <= 1e-14 * std::max(1e-300, c.norm())) {
        if (constant) *constant = base;
        return std::nullopt;
    }
    return makeHalfspace(a, r - base);
}

} // namespace

PolyChain restrictHalfspace(const PolyChain& chain, const Vector& covector, double r, Side side)
{
    if (covector.size() != chain.ambientDim()) throw DimensionError("functional has wrong dimension");
    if (covector.isZero(0.0)) throw ArgumentError("restriction by the zero functional");
    PolyChain out = chain.emptyLike();
    const double tol = chain.tolerance();
    for (const auto& s : chain.summands()) {
        const OrientedPolytope& p = s.poly;
        if (p.k() == 0) {
            double v = covector.dot(p.frame().origin);
            if (side == Side::Below ? v < r : v > r) out.add(s);
            continue;
        }
        double constant = 0.0;
        auto h = localHalfspace(p, covector, r, &constant);
        if (!h) {
            if (side == Side::Below ? constant < r : constant > r) out.add(s);
            continue;
        }
        auto clipped = p.cell().clip(side == Side::Below ? *h : h->flipped(), tol);
        if (clipped) out.add(s.coeff, OrientedPolytope::fromCell(p.frame(), *clipped, p.sign()));
    }
    return canonicalize(out);
}

bool isExceptionalLevel(const PolyChain& chain, const Vector& covector, double r)
{
    const double tol = chain.tolerance() * std::max(1.0, covector.norm());
    for (const auto& s : chain.summands()) {
        const OrientedPolytope& p = s.poly;
        if (p.k() == 0) continue;
        const ConvexCell& cell = p.cell();
        for (int i = 0; i < static_cast<int>(cell.facets().size()); ++i) {
            bool onLevel = true;
            for (int j : cell.facetVertices(i)) {
                Vector x = p.frame().toAmbient(Vector(cell.vertices().col(j)));
                if (std::abs(covector.dot(x) - r) > tol) {
                    onLevel = false;
                    break;
                }
            }
            if (onLevel) return true;
        }
    }
    return false;
}

PolyChain slice(const PolyChain& chain, const Vector& covector, double r)
{
    if (chain.k() == 0) throw ArgumentError("slice of a 0-chain");
    PolyChain canon = canonicalize(chain);
    if (isExceptionalLevel(canon, covector, r))
        throw ExceptionalLevelError("level " + std::to_string(r) + " contains a facet of the chain");
    PolyChain below = restrictHalfspace(canon, covector, r, Side::Below);
    PolyChain bdBelow = restrictHalfspace(boundary(canon), covector, r, Side::Below);
    return canonicalize(rawBoundary(below) - bdBelow);
}

// ---------------------------------------------------------------- subdivision

std::vector<Matrix> standardSubdivision(const Matrix& simplex, int stage)
{
    const int k = static_cast<int>(simplex.cols()) - 1;
    if (stage < 0) throw ArgumentError("negative subdivision stage");
    if (k < 0) throw DegenerateError("empty simplex");
    if (k == 0 || stage == 0) return {simplex};
    Matrix edges = simplex.rightCols(k).colwise() - simplex.col(0);
    if (PlaneKey::rankOf(edges, 1e-10) < k) throw DegenerateError("standard subdivision of a degenerate simplex");

    const int n = 1 << stage;
    std::vector<Matrix> out;
    std::vector<int> a(k, 0);
    auto toPoint = [&](const std::vector<int>& y) {
        Vector x = (1.0 - static_cast<double>(y[0]) / n) * simplex.col(0);
        for (int j = 0; j < k; ++j) {
            double next = j + 1 < k ? y[j + 1] : 0;
            x += ((y[j] - next) / static_cast<double>(n)) * simplex.col(j + 1);
        }
        return x;
    };
    while (true) {
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<std::vector<int>> ys{a};
            for (int j = 0; j < k; ++j) {
                std::vector<int> y = ys.back();
                ++y[perm[j]];
                ys.push_back(y);
            }
            bool inside = true;
            for (const auto& y : ys) {
                if (y[0] > n || y[k - 1] < 0) inside = false;
                for (int j = 0; j + 1 < k; ++j)
                    if (y[j] < y[j + 1]) inside = false;
                if (!inside) break;
            }
            if (inside) {
                Matrix cell(simplex.rows(), k + 1);
                for (int j = 0; j <= k; ++j) cell.col(j) = toPoint(ys[j]);
                out.push_back(cell);
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        int i = k - 1;
        while (i >= 0 && a[i] == n - 1) {
            a[i] = 0;
            --i;
        }
        if (i < 0) break;
        ++a[i];
    }
    return out;
}

double subdivisionFullnessFloor(const NormedSpace& space, const Matrix& simplex)
{
    double best = std::numeric_limits<double>::infinity();
    for (int stage = 1; stage <= 2; ++stage)
        for (const Matrix& cell : standardSubdivision(simplex, stage)) {
            auto p = OrientedPolytope::simplex(cell);
            if (p) best = std::min(best, fullness(space, *p));
        }
    return best;
}

// ---------------------------------------------------------------- piecewise-linear approximation

namespace {

/// Affine function on a simplex (ambient columns) with the given vertex
/// values, in local coordinates of `frame`: value = g.t + h.
struct AffinePiece {
    Vector g;
    double h = 0.0;
};

AffinePiece affineOnSimplex(const Matrix& local, const Vector& vals)
{
    const int k = static_cast<int>(local.rows());
    Matrix m(k, k);
    Vector rhs(k);
    for (int j = 0; j < k; ++j) {
        m.row(j) = (local.col(j + 1) - local.col(0)).transpose();
        rhs(j) = vals(j + 1) - vals(0);
    }
    AffinePiece a;
    a.g = m.fullPivLu().solve(rhs);
    a.h = vals(0) - a.g.dot(local.col(0));
    return a;
}

} // namespace

double PiecewiseLinearFunction::operator()(const Vector& x) const
{
    const int k = static_cast<int>(base.cols()) - 1;
    double bestViolation = std::numeric_limits<double>::infinity();
    double bestValue = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Matrix& s = cells[c];
        Matrix m = s.rightCols(k).colwise() - s.col(0);
        Vector mu = m.colPivHouseholderQr().solve(x - s.col(0));
        double lam0 = 1.0 - mu.sum();
        double violation = std::max(0.0, -std::min(lam0, mu.size() ? mu.minCoeff() : 0.0));
        if (violation < bestViolation) {
            bestViolation = violation;
            bestValue = lam0 * values[c](0) + mu.dot(values[c].tail(k));
        }
        if (violation <= 1e-12) break;
    }
    return bestValue;
}

PiecewiseLinearFunction plApprox(const LipschitzFunction& f, const Matrix& simplex, int stage, const NormedSpace& space)
{
    const int k = static_cast<int>(simplex.cols()) - 1;
    PiecewiseLinearFunction pl;
    pl.base = simplex;
    pl.stage = stage;
    pl.cells = standardSubdivision(simplex, stage);
    Matrix e = PlaneKey::fromSpan(simplex.rightCols(k).colwise() - simplex.col(0)).basis();
    RestrictedNorm rn(space, e);
    for (const Matrix& cell : pl.cells) {
        Vector vals(k + 1);
        for (int j = 0; j <= k; ++j) vals(j) = f(cell.col(j));
        pl.values.push_back(vals);
        if (k >= 1) {
            AffinePiece a = affineOnSimplex(e.transpose() * cell, vals);
            pl.lipschitz = std::max(pl.lipschitz, rn.dual(a.g));
        }
        pl.max_cell_diameter = std::max(pl.max_cell_diameter, normDiameter(space, cell));
    }
    return pl;
}

Matrix enclosingFullSimplex(const NormedSpace& space, const OrientedPolytope& p)
{
    const int k = p.k();
    if (k == 0) throw ArgumentError("enclosing simplex of a point");
    const Matrix& e = p.frame().key.basis();
    FullSimplex fs = fullSimplex(space, p.frame().key);
    Matrix shape = e.transpose() * fs.simplex.vertices();
    auto cell = ConvexCell::fromPoints(shape, 1e-12 * std::max(1.0, shape.norm()));
    if (!cell) throw DegenerateError("full simplex degenerated");
    const Matrix& pts = p.cell().vertices();

    lp::Problem prob;
    prob.num_vars = 2 * k + 1;
    prob.objective.assign(2 * k + 1, 0.0);
    prob.objective[2 * k] = 1.0;
    for (const Halfspace& h : cell->facets())
        for (int q = 0; q < pts.cols(); ++q) {
            std::vector<std::pair<int, double>> terms;
            for (int j = 0; j < k; ++j) {
                terms.emplace_back(j, -h.normal(j));
                terms.emplace_back(k + j, h.normal(j));
            }
            terms.emplace_back(2 * k, -h.offset);
            prob.addRow(std::move(terms), lp::Sense::LessEqual, -h.normal.dot(pts.col(q)));
        }
    lp::Solution sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal) throw SolverError("enclosing simplex LP failed");
    Vector t(k);
    for (int j = 0; j < k; ++j) t(j) = sol.x[j] - sol.x[k + j];
    const double s = sol.x[2 * k];
    const double s2 = s * 1.01 + 1e-12;
    Vector c = shape.rowwise().mean();
    Vector t2 = t + (s - s2) * c;
    Matrix local = (s2 * shape).colwise() + t2;
    return p.frame().toAmbient(local);
}

// ---------------------------------------------------------------- Lipschitz restriction

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RefineNode {
    Matrix cell;  // local coordinates, k x (k+1)
    Vector vals;  // f at the cell vertices
    double fmin = 0.0, fmax = 0.0;
    std::optional<ConvexCell> piece;
};

enum class CellClass { Below, Above, Straddle };

CellClass classify(const RefineNode& n, double r)
{
    if (n.fmax < r) return CellClass::Below;
    if (n.fmin > r) return CellClass::Above;
    return CellClass::Straddle;
}

RefineNode makeNode(const Matrix& local, const OrientedPolytope& p, const LipschitzFunction& f,
                    const std::optional<ConvexCell>* parentPiece, double pmin, double pmax, double tol, bool wantPiece)
{
    RefineNode n;
    n.cell = local;
    Matrix amb = p.frame().toAmbient(local);
    n.vals.resize(amb.cols());
    for (int j = 0; j < amb.cols(); ++j) n.vals(j) = f(amb.col(j));
    n.fmax = std::min(n.vals.maxCoeff(), pmax);
    n.fmin = std::max(std::min(f.minOver(amb), n.vals.minCoeff()), pmin);
    if (n.fmin > n.fmax) n.fmin = n.fmax;
    if (wantPiece && parentPiece && *parentPiece) {
        auto c = ConvexCell::fromPoints(local, tol);
        if (c) n.piece = (*parentPiece)->intersect(*c, tol);
    }
    return n;
}

std::optional<ConvexCell> clipAffine(const std::optional<ConvexCell>& piece, const AffinePiece& a, double r, Side side,
                                     double tol)
{
    if (!piece) return std::nullopt;
    auto h = makeHalfspace(a.g, r - a.h);
    if (!h || a.g.norm() <= 1e-14) {
        bool below = a.h < r;
        return (below == (side == Side::Below)) ? piece : std::nullopt;
    }
    return piece->clip(side == Side::Below ? *h : h->flipped(), tol);
}

double vol(const std::optional<ConvexCell>& c) { return c ? c->volume() : 0.0; }

} // namespace

Restriction restrictLipschitz(const PolyChain& chain, const LipschitzFunction& f, double r,
                              const RestrictionOptions& options)
{
    const PolyChain canon = canonicalize(chain);
    const int stages = std::max(0, options.stages);
    Restriction out{canon.emptyLike(), canon.emptyLike(), {}};
    RestrictionReport& rep = out.report;
    rep.stage_mass.assign(stages + 1, 0.0);
    rep.diff_mass.assign(stages + 1, 0.0);
    rep.size_n.assign(stages + 1, 0.0);
    rep.size_p.assign(stages + 1, 0.0);
    rep.size_u.assign(stages + 1, 0.0);

    if (f.kind() == LipschitzKind::Linear || canon.k() == 0) {
        if (f.kind() == LipschitzKind::Linear) {
            out.inside = restrictHalfspace(canon, f.covector(), r - f.offset(), Side::Below);
            out.outside = restrictHalfspace(canon, f.covector(), r - f.offset(), Side::Above);
        } else {
            for (const auto& s : canon.summands()) {
                if (f(s.poly.frame().origin) < r) out.inside.add(s);
                else out.outside.add(s);
            }
        }
        const double m = mass(out.inside);
        std::fill(rep.stage_mass.begin(), rep.stage_mass.end(), m);
        if (options.keep_stage_chains) rep.stage_chains.assign(stages + 1, out.inside);
        return out;
    }

    const double tol = canon.tolerance();
    const NormedSpace& space = canon.space();
    std::vector<PolyChain> stageChains(options.keep_stage_chains ? stages + 1 : 0, canon.emptyLike());

    for (const auto& s : canon.summands()) {
        const OrientedPolytope& p = s.poly;
        const double sigma = density(space, p.frame().key);
        const double gn = s.coeff.norm();
        Matrix delta = enclosingFullSimplex(space, p);
        rep.eta.push_back(subdivisionFullnessFloor(space, delta));
        std::optional<ConvexCell> whole = p.cell();
        RefineNode root = makeNode(p.frame().toLocal(delta), p, f, &whole, -kInf, kInf, tol, true);

        std::vector<ConvexCell> fixedBelow, fixedAbove;
        double szBelow = 0.0, szAbove = 0.0;
        std::vector<RefineNode> active;
        auto file = [&](RefineNode&& n) {
            const double sz = sigma * simplexVolume(n.cell);
            switch (classify(n, r)) {
            case CellClass::Below:
                szBelow += sz;
                if (n.piece) fixedBelow.push_back(*n.piece);
                break;
            case CellClass::Above:
                szAbove += sz;
                if (n.piece) fixedAbove.push_back(*n.piece);
                break;
            case CellClass::Straddle: active.push_back(std::move(n)); break;
            }
        };
        file(std::move(root));

        for (int i = 0; i <= stages; ++i) {
            if (i > 0) {
                std::vector<RefineNode> parents;
                parents.swap(active);
                double diff = 0.0;
                for (const RefineNode& par : parents) {
                    AffinePiece apar = affineOnSimplex(par.cell, par.vals);
                    for (const Matrix& child : standardSubdivision(par.cell, 1)) {
                        RefineNode c = makeNode(child, p, f, &par.piece, par.fmin, par.fmax, tol, par.piece.has_value());
                        if (c.piece) {
                            auto a = clipAffine(c.piece, apar, r, Side::Below, tol);
                            const double va = vol(a);
                            switch (classify(c, r)) {
                            case CellClass::Below: diff += c.piece->volume() - va; break;
                            case CellClass::Above: diff += va; break;
                            case CellClass::Straddle: {
                                AffinePiece ac = affineOnSimplex(c.cell, c.vals);
                                auto b = clipAffine(c.piece, ac, r, Side::Below, tol);
                                auto ab = clipAffine(a, ac, r, Side::Below, tol);
                                diff += va + vol(b) - 2.0 * vol(ab);
                                break;
                            }
                            }
                        }
                        file(std::move(c));
                    }
                }
                rep.diff_mass[i] += gn * sigma * std::max(0.0, diff);
            }
            double szU = 0.0, insideVol = 0.0;
            for (const ConvexCell& c : fixedBelow) insideVol += c.volume();
            for (const RefineNode& n : active) {
                szU += sigma * simplexVolume(n.cell);
                insideVol += vol(clipAffine(n.piece, affineOnSimplex(n.cell, n.vals), r, Side::Below, tol));
            }
            rep.size_n[i] += szBelow;
            rep.size_p[i] += szAbove;
            rep.size_u[i] += szU;
            rep.stage_mass[i] += gn * sigma * insideVol;
            if (options.keep_stage_chains) {
                for (const ConvexCell& c : fixedBelow)
                    stageChains[i].add(s.coeff, OrientedPolytope::fromCell(p.frame(), c, p.sign()));
                for (const RefineNode& n : active) {
                    auto in = clipAffine(n.piece, affineOnSimplex(n.cell, n.vals), r, Side::Below, tol);
                    if (in) stageChains[i].add(s.coeff, OrientedPolytope::fromCell(p.frame(), *in, p.sign()));
                }
            }
        }

        for (const ConvexCell& c : fixedBelow) out.inside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), c, p.sign()));
        for (const ConvexCell& c : fixedAbove) out.outside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), c, p.sign()));
        for (const RefineNode& n : active) {
            AffinePiece a = affineOnSimplex(n.cell, n.vals);
            auto in = clipAffine(n.piece, a, r, Side::Below, tol);
            auto outp = clipAffine(n.piece, a, r, Side::Above, tol);
            if (in) out.inside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), *in, p.sign()));
            if (outp) out.outside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), *outp, p.sign()));
        }
    }
    rep.stage_chains = std::move(stageChains);
    rep.converged = stages == 0 || rep.diff_mass[stages] < options.tolerance;
    return out;
}

ExceptionalScan exceptionalScan(const PolyChain& chain, const LipschitzFunction& f, int stages,
                                const std::vector<double>& levels)
{
    const PolyChain canon = canonicalize(chain);
    ExceptionalScan scan;
    scan.levels = levels;
    scan.size_u.assign(levels.size(), std::vector<double>(stages + 1, 0.0));
    scan.level_integral.assign(stages + 1, 0.0);
    scan.level_integral_bound.assign(stages + 1, 0.0);
    if (canon.k() == 0) return scan;
    const NormedSpace& space = canon.space();
    const double lip = f.lipschitz();
    const double tol = canon.tolerance();

    for (const auto& s : canon.summands()) {
        const OrientedPolytope& p = s.poly;
        const double sigma = density(space, p.frame().key);
        Matrix delta = enclosingFullSimplex(space, p);
        const double szDelta = sigma * simplexVolume(delta);
        std::vector<RefineNode> cells{makeNode(p.frame().toLocal(delta), p, f, nullptr, -kInf, kInf, tol, false)};
        for (int i = 0; i <= stages; ++i) {
            if (i > 0) {
                std::vector<RefineNode> next;
                for (const RefineNode& par : cells)
                    for (const Matrix& child : standardSubdivision(par.cell, 1))
                        next.push_back(makeNode(child, p, f, nullptr, par.fmin, par.fmax, tol, false));
                cells.swap(next);
            }
            double maxDiam = 0.0;
            for (const RefineNode& n : cells) {
                const double sz = sigma * simplexVolume(n.cell);
                scan.level_integral[i] += (n.fmax - n.fmin) * sz;
                maxDiam = std::max(maxDiam, normDiameter(space, p.frame().toAmbient(n.cell)));
                for (std::size_t j = 0; j < levels.size(); ++j)
                    if (n.fmin <= levels[j] && levels[j] <= n.fmax) scan.size_u[j][i] += sz;
            }
            scan.level_integral_bound[i] += lip * maxDiam * szDelta;
        }
    }
    for (std::size_t j = 0; j < levels.size(); ++j)
        for (int i = 1; i <= stages; ++i)
            if (scan.size_u[j][i] > scan.size_u[j][i - 1] * (1.0 + 1e-12) + 1e-15) scan.monotone = false;
    for (int i = 0; i <= stages; ++i)
        if (scan.level_integral[i] > scan.level_integral_bound[i] * (1.0 + 1e-9) + 1e-15) scan.integral_bound_ok = false;
    return scan;
}

// ---------------------------------------------------------------- balls

namespace {

/// Splits each summand by the region {a_j . x <= b_j for all j}.
void clipRegion(const PolyChain& chain, const Matrix& a, const Vector& b, PolyChain& inside, PolyChain& outside)
{
    const double tol = chain.tolerance();
    for (const auto& s : chain.summands()) {
        const OrientedPolytope& p = s.poly;
        if (p.k() == 0) {
            Vector x = p.frame().origin;
            bool in = ((a * x - b).array() <= 0.0).all();
            (in ? inside : outside).add(s);
            continue;
        }
        std::optional<ConvexCell> cur = p.cell();
        for (int j = 0; j < a.rows() && cur; ++j) {
            double constant = 0.0;
            auto h = localHalfspace(p, a.row(j).transpose(), b(j), &constant);
            if (!h) {
                if (constant > b(j)) {
                    outside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), *cur, p.sign()));
                    cur.reset();
                }
                continue;
            }
            auto away = cur->clip(h->flipped(), tol);
            if (away) outside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), *away, p.sign()));
            cur = cur->clip(*h, tol);
        }
        if (cur) inside.add(s.coeff, OrientedPolytope::fromCell(p.frame(), *cur, p.sign()));
    }
}

} // namespace

RegionSplit restrictRegion(const PolyChain& chain, const Matrix& a, const Vector& b)
{
    RegionSplit out{chain.emptyLike(), chain.emptyLike()};
    clipRegion(chain, a, b, out.inside, out.outside);
    return out;
}

void ballHalfspaces(const NormedSpace& space, const Vector& center, double radius, Matrix& a, Vector& b,
                    int directions)
{
    const int d = space.dim();
    if (space.isPolyhedral()) {
        a = space.ballFacets();
    } else {
        std::vector<Vector> dirs;
        if (d == 1) {
            dirs = {Vector::Ones(1), -Vector::Ones(1)};
        } else if (d == 2) {
            for (int i = 0; i < directions; ++i) {
                const double t = 2.0 * M_PI * i / directions;
                Vector u(2);
                u << std::cos(t), std::sin(t);
                dirs.push_back(u);
            }
        } else {
            dirs = sphereStarts(d, directions, false, 7);
            for (int i = 0; i < d; ++i) {
                dirs.push_back(Vector::Unit(d, i));
                dirs.push_back(-Vector::Unit(d, i));
            }
        }
        a.resize(static_cast<Eigen::Index>(dirs.size()), d);
        for (std::size_t i = 0; i < dirs.size(); ++i)
            a.row(static_cast<Eigen::Index>(i)) = dirs[i].transpose() / space.dualNorm(dirs[i]);
    }
    b = (a * center).array() + radius;
}

BallRestriction restrictBall(const PolyChain& chain, const Vector& center, double radius, int stages)
{
    const PolyChain canon = canonicalize(chain);
    const NormedSpace& space = canon.space();
    BallRestriction out{canon.emptyLike(), canon.emptyLike(), canon.k() > 0 ? canon.emptyLike(canon.k() - 1) : canon.emptyLike(), true};
    PolyChain bdInside = out.slice;
    if (space.isPolyhedral()) {
        const Matrix& h = space.ballFacets();
        Vector b = (h * center).array() + radius;
        clipRegion(canon, h, b, out.inside, out.outside);
        if (canon.k() > 0) {
            PolyChain bdOutside = bdInside;
            clipRegion(boundary(canon), h, b, bdInside, bdOutside);
        }
    } else {
        out.exact = false;
        RestrictionOptions opt;
        opt.stages = stages;
        opt.keep_stage_chains = false;
        LipschitzFunction f = LipschitzFunction::distanceToPoint(space, center);
        Restriction r = restrictLipschitz(canon, f, radius, opt);
        out.inside = r.inside;
        out.outside = r.outside;
        if (canon.k() > 0) bdInside = restrictLipschitz(boundary(canon), f, radius, opt).inside;
    }
    if (canon.k() > 0) out.slice = canonicalize(rawBoundary(out.inside) - bdInside);
    return out;
}

// ---------------------------------------------------------------- Eilenberg

EilenbergResult eilenbergRatio(const PolyChain& chain, const LipschitzFunction& f, int steps, int stages)
{
    const PolyChain canon = canonicalize(chain);
    if (canon.k() == 0) throw ArgumentError("Eilenberg ratio needs k >= 1");
    EilenbergResult res;
    const double m = mass(canon);
    if (canon.isZero() || m == 0.0) return res;
    const NormedSpace& space = canon.space();
    const double tol = canon.tolerance();
    const int k = canon.k();

    if (f.kind() == LipschitzKind::Linear) {
        std::vector<double> levels;
        for (const auto& s : canon.summands())
            for (int j = 0; j < s.poly.vertices().cols(); ++j) levels.push_back(f(s.poly.vertices().col(j)));
        std::sort(levels.begin(), levels.end());
        const GaussRule rule = gaussLegendre(5);
        for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
            const double lo = levels[i], hi = levels[i + 1];
            if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) continue;
            double part = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double x = lo + rule.nodes[q] * (hi - lo);
                part += rule.weights[q] * mass(slice(canon, f.covector(), x - f.offset()));
            }
            res.integral += part * (hi - lo);
        }
    } else {
        struct Piece {
            std::vector<Matrix> simplices;  // local
            AffinePiece a;
            double lo, hi;
            double coeff;
            const OrientedPolytope* poly;
            double sliceDensity;
        };
        std::vector<Piece> pieces;
        double fmin = kInf, fmax = -kInf;
        for (const auto& s : canon.summands()) {
            const OrientedPolytope& p = s.poly;
            Matrix delta = p.frame().toLocal(enclosingFullSimplex(space, p));
            for (const Matrix& cell : standardSubdivision(delta, stages)) {
                auto cc = ConvexCell::fromPoints(cell, tol);
                if (!cc) continue;
                auto piece = p.cell().intersect(*cc, tol);
                if (!piece) continue;
                Matrix amb = p.frame().toAmbient(cell);
                Vector vals(amb.cols());
                for (int j = 0; j < amb.cols(); ++j) vals(j) = f(amb.col(j));
                Piece pc;
                pc.a = affineOnSimplex(cell, vals);
                Vector pv = pc.a.g.transpose() * piece->vertices();
                pc.lo = pv.minCoeff() + pc.a.h;
                pc.hi = pv.maxCoeff() + pc.a.h;
                pc.coeff = s.coeff.norm();
                pc.poly = &p;
                pc.sliceDensity = 1.0;
                if (k == 1) {
                    res.integral += pc.coeff * (pc.hi - pc.lo);
                    continue;
                }
                if (k >= 3 && pc.a.g.norm() > 0) {
                    Matrix sb = p.frame().key.basis() * complementBasis(pc.a.g.normalized());
                    pc.sliceDensity = density(space, PlaneKey::fromSpan(sb));
                }
                pc.simplices = piece->triangulate(tol);
                fmin = std::min(fmin, pc.lo);
                fmax = std::max(fmax, pc.hi);
                pieces.push_back(std::move(pc));
            }
        }
        if (k >= 2 && !pieces.empty() && fmax > fmin) {
            const double h = (fmax - fmin) / steps;
            for (int step = 0; step < steps; ++step) {
                const double x = fmin + (step + 0.5) * h;
                double total = 0.0;
                for (const Piece& pc : pieces) {
                    if (x < pc.lo || x > pc.hi || pc.a.g.norm() == 0) continue;
                    const Matrix& e = pc.poly->frame().key.basis();
                    Matrix sb = complementBasis(pc.a.g.normalized());
                    for (const Matrix& sim : pc.simplices) {
                        Matrix pts = simplexSlice(sim, pc.a.g, x - pc.a.h);
                        if (pts.cols() < k) continue;
                        if (k == 2) {
                            double best = 0.0;
                            for (int q = 1; q < pts.cols(); ++q)
                                best = std::max(best, space.norm(e * (pts.col(q) - pts.col(0))));
                            total += pc.coeff * best;
                        } else {
                            auto c = ConvexCell::fromPoints(sb.transpose() * pts, tol);
                            if (c) total += pc.coeff * pc.sliceDensity * c->volume();
                        }
                    }
                }
                res.integral += h * total;
            }
        }
    }
    res.ratio = res.integral / (f.lipschitz() * m);
    return res;
}

} // namespace flatchain
