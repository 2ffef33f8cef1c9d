#include "flatchain/chains.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/LU>

#include "flatchain/errors.hpp"

namespace flatchain {

namespace {

double boxDiagonal(const Matrix& pts)
{
    if (pts.cols() == 0) return 0.0;
    return (pts.rowwise().maxCoeff() - pts.rowwise().minCoeff()).norm();
}

double defaultTol(const Matrix& pts)
{
    double d = boxDiagonal(pts);
    return kRelativeTolerance * (d > 0 ? d : 1.0);
}

int detSign(const Matrix& m)
{
    if (m.cols() == 0) return 1;
    double d = m.determinant();
    return d >= 0 ? 1 : -1;
}

} // namespace

// ---------------------------------------------------------------- OrientedPolytope

std::optional<OrientedPolytope> OrientedPolytope::make(const Matrix& vertices, const Matrix& basis, double tol)
{
    const int d = static_cast<int>(vertices.rows());
    const int k = static_cast<int>(basis.cols());
    if (vertices.cols() == 0) throw DegenerateError("polytope without vertices");
    if (basis.cols() > 0 && basis.rows() != d) throw DimensionError("orientation basis has wrong ambient dimension");
    if (k > d) throw DimensionError("k exceeds ambient dimension");
    if (tol < 0) tol = defaultTol(vertices);
    if (k == 0) {
        if (vertices.cols() > 1 && boxDiagonal(vertices) > tol)
            throw DegenerateError("0-polytope with more than one point");
        return point(vertices.col(0));
    }
    if (PlaneKey::rankOf(basis, 1e-9) < k) throw DegenerateError("dependent orientation basis");

    OrientedPolytope p;
    p.frame_.origin = vertices.col(0);
    p.frame_.key = PlaneKey::fromSpan(basis, 1e-9);
    for (int j = 0; j < vertices.cols(); ++j)
        if (p.frame_.offFlatDistance(vertices.col(j)) > std::max(tol, 1e-9 * boxDiagonal(vertices)))
            throw DegenerateError("vertex off the flat spanned by the orientation basis");
    Matrix local = p.frame_.toLocal(vertices);
    auto cell = ConvexCell::fromPoints(local, tol);
    if (!cell) return std::nullopt;

    // Keep the caller's coordinates for the extreme points.
    const Matrix& cv = cell->vertices();
    p.vertices_ = Matrix(d, cv.cols());
    for (int j = 0; j < cv.cols(); ++j) {
        Eigen::Index best = 0;
        (local.colwise() - cv.col(j)).colwise().squaredNorm().minCoeff(&best);
        p.vertices_.col(j) = vertices.col(best);
    }
    p.cell_ = std::move(cell);
    p.basis_ = basis;
    p.sign_ = detSign(p.frame_.key.basis().transpose() * basis);
    return p;
}

std::optional<OrientedPolytope> OrientedPolytope::simplex(const Matrix& vertices, double tol)
{
    const int k = static_cast<int>(vertices.cols()) - 1;
    if (k < 0) throw DegenerateError("simplex without vertices");
    if (k == 0) return point(vertices.col(0));
    Matrix basis = vertices.rightCols(k).colwise() - vertices.col(0);
    if (tol < 0) tol = defaultTol(vertices);
    if (PlaneKey::rankOf(basis, 1e-9) < k) return std::nullopt;
    return make(vertices, basis, tol);
}

OrientedPolytope OrientedPolytope::point(const Vector& x)
{
    OrientedPolytope p;
    p.vertices_ = Matrix(x);
    p.basis_ = Matrix(x.size(), 0);
    p.frame_.origin = x;
    p.frame_.key = PlaneKey::fromSpan(Matrix(x.size(), 0));
    p.cell_ = ConvexCell::fromPoints(Matrix(0, 1), 0.0);
    return p;
}

OrientedPolytope OrientedPolytope::fromCell(const PlaneFrame& frame, const ConvexCell& cell, int sign)
{
    if (frame.key.dim() == 0) return point(frame.origin);
    OrientedPolytope p;
    p.frame_ = frame;
    p.cell_ = cell;
    p.vertices_ = frame.toAmbient(cell.vertices());
    p.basis_ = frame.key.basis();
    p.sign_ = sign >= 0 ? 1 : -1;
    if (p.sign_ < 0) p.basis_.col(0) = -p.basis_.col(0);
    return p;
}

double OrientedPolytope::diameter() const { return boxDiagonal(vertices_); }

OrientedPolytope OrientedPolytope::reversed() const
{
    if (k() == 0) throw ArgumentError("a point has no orientation to reverse");
    OrientedPolytope p = *this;
    p.basis_.col(0) = -p.basis_.col(0);
    p.sign_ = -sign_;
    return p;
}

bool OrientedPolytope::contains(const Vector& x, double tol) const
{
    if (frame_.offFlatDistance(x) > tol) return false;
    if (k() == 0) return true;
    return cell_->contains(frame_.toLocal(x), tol);
}

// ---------------------------------------------------------------- PolyChain

PolyChain::PolyChain(NormedSpace space, CoefficientGroup group, int k)
    : space_(std::move(space)), group_(group), k_(k)
{
    if (k < 0 || k > space_.dim()) throw DimensionError("chain dimension out of range");
}

void PolyChain::add(const GroupElement& g, const OrientedPolytope& p)
{
    if (!group_.contains(g)) throw GroupMismatchError("coefficient not in the chain's group");
    if (p.ambientDim() != space_.dim()) throw DimensionError("summand ambient dimension mismatch");
    if (p.k() != k_) throw DimensionError("summand dimension mismatch");
    summands_.push_back(SimpleChain{g, p});
}

void PolyChain::addSimplex(double c, const Matrix& vertices)
{
    auto p = OrientedPolytope::simplex(vertices);
    if (p) add(c, *p);
}

void PolyChain::checkCompatible(const PolyChain& other) const
{
    if (!space_.sameNorm(other.space_)) throw DimensionError("chains live in different spaces");
    if (!(group_ == other.group_)) throw GroupMismatchError("chains use different coefficient groups");
    if (k_ != other.k_) throw DimensionError("chains of different dimension");
}

PolyChain PolyChain::operator+(const PolyChain& other) const
{
    checkCompatible(other);
    PolyChain out = *this;
    out.summands_.insert(out.summands_.end(), other.summands_.begin(), other.summands_.end());
    return out;
}

PolyChain PolyChain::operator-() const
{
    PolyChain out = *this;
    for (auto& s : out.summands_) s.coeff = -s.coeff;
    return out;
}

PolyChain PolyChain::operator-(const PolyChain& other) const { return *this + (-other); }

double PolyChain::diameter() const
{
    if (summands_.empty()) return 0.0;
    const int d = ambientDim();
    Vector lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    for (const auto& s : summands_) {
        lo = lo.cwiseMin(s.poly.vertices().rowwise().minCoeff());
        hi = hi.cwiseMax(s.poly.vertices().rowwise().maxCoeff());
    }
    return (hi - lo).norm();
}

double PolyChain::tolerance() const
{
    double d = diameter();
    return kRelativeTolerance * (d > 0 ? d : 1.0);
}

// ---------------------------------------------------------------- canonicalize

namespace {

struct Cell {
    ConvexCell cell;
    GroupElement coeff;
};

struct FlatGroup {
    PlaneFrame frame;
    std::vector<Cell> cells;
};

/// Inserts (c, g) into the disjoint list, scanning entries from `start` on.
void insertCell(std::vector<Cell>& cells, const ConvexCell& c, const GroupElement& g, std::size_t start, double tol)
{
    for (std::size_t i = start; i < cells.size(); ++i) {
        if (!cells[i].cell.boxesOverlap(c, tol)) continue;
        auto meet = cells[i].cell.intersect(c, tol);
        if (!meet) continue;
        Cell old = cells[i];
        cells[i] = Cell{*meet, old.coeff + g};
        for (const ConvexCell& rest : old.cell.subtract(*meet, tol)) cells.push_back(Cell{rest, old.coeff});
        for (const ConvexCell& rest : c.subtract(*meet, tol)) insertCell(cells, rest, g, i + 1, tol);
        return;
    }
    cells.push_back(Cell{c, g});
}

} // namespace

PolyChain canonicalize(const PolyChain& chain)
{
    PolyChain out = chain.emptyLike();
    const double tol = chain.tolerance();
    std::vector<FlatGroup> groups;

    for (const auto& s : chain.summands()) {
        if (s.coeff.isNegligible(kCoefficientTolerance)) continue;
        const OrientedPolytope& p = s.poly;
        FlatGroup* grp = nullptr;
        for (auto& g : groups)
            if (g.frame.sameFlat(p.frame(), tol)) {
                grp = &g;
                break;
            }
        if (!grp) {
            groups.push_back(FlatGroup{p.frame(), {}});
            grp = &groups.back();
        }
        GroupElement g = s.coeff;
        if (chain.k() == 0) {
            if (grp->cells.empty()) grp->cells.push_back(Cell{p.cell(), g});
            else grp->cells[0].coeff = grp->cells[0].coeff + g;
            continue;
        }
        int sgn = detSign(grp->frame.key.basis().transpose() * p.orientationBasis());
        if (sgn < 0) g = -g;
        auto cell = ConvexCell::fromPoints(grp->frame.toLocal(p.vertices()), tol);
        if (!cell) continue;
        insertCell(grp->cells, *cell, g, 0, tol);
    }

    for (const auto& grp : groups)
        for (const auto& c : grp.cells) {
            if (c.coeff.isNegligible(kCoefficientTolerance)) continue;
            out.add(c.coeff, OrientedPolytope::fromCell(grp.frame, c.cell, 1));
        }
    return out;
}

// ---------------------------------------------------------------- boundary

PolyChain rawBoundary(const PolyChain& chain)
{
    if (chain.k() == 0) throw ArgumentError("boundary of a 0-chain");
    const int k = chain.k();
    PolyChain out = chain.emptyLike(k - 1);
    for (const auto& s : chain.summands()) {
        const OrientedPolytope& p = s.poly;
        const ConvexCell& cell = p.cell();
        const Matrix& e = p.frame().key.basis();
        for (int i = 0; i < static_cast<int>(cell.facets().size()); ++i) {
            const Vector& n = cell.facets()[i].normal;
            const auto& fv = cell.facetVertices(i);
            Matrix local(k, static_cast<Eigen::Index>(fv.size()));
            for (std::size_t j = 0; j < fv.size(); ++j)
                local.col(static_cast<Eigen::Index>(j)) = cell.vertices().col(fv[j]);
            Matrix verts = p.frame().toAmbient(local);
            if (k == 1) {
                GroupElement g = (n(0) * p.sign() > 0) ? s.coeff : -s.coeff;
                out.add(g, OrientedPolytope::point(verts.col(0)));
                continue;
            }
            Matrix t = cell.facetBasis(i);
            Matrix nt(k, k);
            nt.col(0) = n;
            nt.rightCols(k - 1) = t;
            if (detSign(nt) != p.sign()) t.col(0) = -t.col(0);
            auto face = OrientedPolytope::make(verts, e * t, chain.tolerance());
            if (face) out.add(s.coeff, *face);
        }
    }
    return out;
}

PolyChain boundary(const PolyChain& chain) { return canonicalize(rawBoundary(chain)); }

// ---------------------------------------------------------------- support

std::vector<Matrix> support(const PolyChain& chain)
{
    std::vector<Matrix> out;
    const PolyChain canon = canonicalize(chain);
    for (const auto& s : canon.summands()) out.push_back(s.poly.vertices());
    return out;
}

bool supportContains(const PolyChain& chain, const Vector& x, double tol)
{
    for (const auto& s : chain.summands())
        if (s.poly.contains(x, tol)) return true;
    return false;
}

// ---------------------------------------------------------------- pushforward

PolyChain affinePushforward(const PolyChain& chain, const Matrix& a, const Vector& b, const NormedSpace& target)
{
    if (a.cols() != chain.ambientDim()) throw DimensionError("map domain dimension mismatch");
    if (a.rows() != target.dim() || b.size() != target.dim()) throw DimensionError("map target dimension mismatch");
    if (PlaneKey::rankOf(a, 1e-12) < a.cols()) throw ArgumentError("affine map is not injective");
    PolyChain out(target, chain.group(), chain.k());
    for (const auto& s : chain.summands()) {
        Matrix v = (a * s.poly.vertices()).colwise() + b;
        if (chain.k() == 0) {
            out.add(s.coeff, OrientedPolytope::point(v.col(0)));
            continue;
        }
        auto p = OrientedPolytope::make(v, a * s.poly.orientationBasis());
        if (p) out.add(s.coeff, *p);
    }
    return out;
}

PolyChain affinePushforward(const PolyChain& chain, const Matrix& a, const Vector& b)
{
    if (a.rows() != a.cols()) throw ArgumentError("non-square map needs an explicit target space");
    return affinePushforward(chain, a, b, chain.space());
}

bool chainsEqual(const PolyChain& a, const PolyChain& b) { return canonicalize(a - b).isZero(); }

} // namespace flatchain
