#include "flatchain/flatnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "flatchain/errors.hpp"
#include "flatchain/lp.hpp"
#include "flatchain/mass.hpp"
#include "flatchain/slicing.hpp"

namespace flatchain {

namespace {

double groupNorm(const CoefficientGroup& group, double value)
{
    if (group.kind() == GroupKind::IntegersModM) {
        const std::int64_t m = group.modulus();
        const std::int64_t r = ((static_cast<std::int64_t>(std::llround(value)) % m) + m) % m;
        return static_cast<double>(std::min(r, m - r));
    }
    return std::abs(value);
}

double normalizeCoefficient(const CoefficientGroup& group, double value)
{
    switch (group.kind()) {
    case GroupKind::Integers: return static_cast<double>(std::llround(value));
    case GroupKind::IntegersModM: {
        const std::int64_t m = group.modulus();
        return static_cast<double>(((static_cast<std::int64_t>(std::llround(value)) % m) + m) % m);
    }
    case GroupKind::Reals: break;
    }
    return value;
}

double coefficientValue(const GroupElement& g)
{
    return g.kind() == GroupKind::Reals ? g.realValue() : static_cast<double>(g.integerValue());
}

int permutationParity(std::vector<int>& ids)
{
    int parity = 1;
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j + 1 < ids.size() - i; ++j)
            if (ids[j] > ids[j + 1]) {
                std::swap(ids[j], ids[j + 1]);
                parity = -parity;
            }
    return parity;
}

} // namespace

bool Box::contains(const Vector& x, double tol) const
{
    return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
}

// ---------------------------------------------------------------- complex

SimplicialComplex SimplicialComplex::build(const NormedSpace& space, const Box& box, int resolution)
{
    const int d = space.dim();
    if (d < 1 || d > 4) throw DimensionError("complexes are limited to dimensions 1 to 4");
    if (resolution < 1) throw ArgumentError("resolution must be at least 1");
    if (box.lo.size() != d || box.hi.size() != d) throw DimensionError("box dimension differs from the space");
    if (((box.hi - box.lo).array() <= 0.0).any()) throw ArgumentError("box must have positive extent");
    const long long cells = static_cast<long long>(std::pow(resolution, d));
    if (cells > 200000) throw ArgumentError("resolution too large for this dimension");

    SimplicialComplex c(space, box, resolution);
    const int n = resolution;
    const int side = n + 1;
    int nv = 1;
    for (int i = 0; i < d; ++i) nv *= side;
    c.vertices_.resize(d, nv);
    for (int v = 0; v < nv; ++v) {
        int rest = v;
        for (int i = 0; i < d; ++i) {
            c.vertices_(i, v) = box.lo(i) + (box.hi(i) - box.lo(i)) * (rest % side) / n;
            rest /= side;
        }
    }
    std::vector<int> stride(static_cast<std::size_t>(d), 1);
    for (int i = 1; i < d; ++i) stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i - 1)] * side;

    c.simplices_.assign(static_cast<std::size_t>(d + 1), {});
    c.lookup_.assign(static_cast<std::size_t>(d + 1), {});
    std::vector<int> cube(static_cast<std::size_t>(d), 0);
    const long long ncubes = cells;
    for (long long q = 0; q < ncubes; ++q) {
        long long rest = q;
        int base = 0;
        for (int i = 0; i < d; ++i) {
            cube[static_cast<std::size_t>(i)] = static_cast<int>(rest % n);
            rest /= n;
            base += cube[static_cast<std::size_t>(i)] * stride[static_cast<std::size_t>(i)];
        }
        std::vector<int> perm(static_cast<std::size_t>(d));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<int> top{base};
            for (int i = 0; i < d; ++i) top.push_back(top.back() + stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
            for (unsigned mask = 1; mask < (1u << (d + 1)); ++mask) {
                std::vector<int> face;
                for (int i = 0; i <= d; ++i)
                    if (mask & (1u << i)) face.push_back(top[static_cast<std::size_t>(i)]);
                const std::size_t j = face.size() - 1;
                auto [it, inserted] = c.lookup_[j].emplace(face, static_cast<int>(c.simplices_[j].size()));
                if (inserted) {
                    c.simplices_[j].push_back(face);
                    if (j == static_cast<std::size_t>(d)) {
                        c.topCube_.push_back(cube);
                        c.topPerm_.push_back(perm);
                    }
                }
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    c.boundary_.assign(static_cast<std::size_t>(d + 1), {});
    for (int j = 1; j <= d; ++j) {
        Incidence& inc = c.boundary_[static_cast<std::size_t>(j)];
        inc.resize(c.simplices_[static_cast<std::size_t>(j)].size());
        for (std::size_t s = 0; s < inc.size(); ++s) {
            const std::vector<int>& verts = c.simplices_[static_cast<std::size_t>(j)][s];
            for (int i = 0; i <= j; ++i) {
                std::vector<int> face = verts;
                face.erase(face.begin() + i);
                inc[s].emplace_back(c.lookup_[static_cast<std::size_t>(j - 1)].at(face), (i % 2 == 0) ? 1 : -1);
            }
        }
    }
    for (int j = 2; j <= d; ++j) {
        for (const auto& column : c.boundary_[static_cast<std::size_t>(j)]) {
            std::map<int, int> acc;
            for (const auto& [f, sf] : column)
                for (const auto& [g, sg] : c.boundary_[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(f)])
                    acc[g] += sf * sg;
            for (const auto& [g, v] : acc)
                if (v != 0) throw Error("complex boundary matrices do not compose to zero");
        }
    }

    int perms = 1;
    for (int i = 2; i <= d; ++i) perms *= i;
    for (int s = 0; s < perms; ++s) {
        const std::vector<int>& ids = c.simplices_[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)];
        for (int u : ids)
            for (int v : ids)
                c.cellDiameter_ = std::max(c.cellDiameter_, space.norm(c.vertices_.col(u) - c.vertices_.col(v)));
    }

    c.masses_.assign(static_cast<std::size_t>(d + 1), {});
    for (int j = 0; j <= d; ++j) {
        auto& m = c.masses_[static_cast<std::size_t>(j)];
        m.resize(c.simplices_[static_cast<std::size_t>(j)].size());
        for (std::size_t s = 0; s < m.size(); ++s)
            m[s] = j == 0 ? 1.0 : mass(space, SimpleChain{GroupElement::real(1.0), c.polytope(j, static_cast<int>(s))});
    }
    return c;
}

const std::vector<int>& SimplicialComplex::simplex(int j, int index) const
{
    return simplices_.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(index));
}

const Incidence& SimplicialComplex::boundaryMatrix(int j) const
{
    if (j < 1 || j > dim()) throw ArgumentError("boundary matrix index out of range");
    return boundary_[static_cast<std::size_t>(j)];
}

double SimplicialComplex::simplexMass(int j, int index) const
{
    return masses_.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(index));
}

int SimplicialComplex::find(const std::vector<int>& sorted_vertices) const
{
    if (sorted_vertices.empty() || sorted_vertices.size() > static_cast<std::size_t>(dim() + 1)) return -1;
    const auto& table = lookup_[sorted_vertices.size() - 1];
    auto it = table.find(sorted_vertices);
    return it == table.end() ? -1 : it->second;
}

int SimplicialComplex::roundToVertex(const Vector& x) const
{
    int index = 0;
    int stride = 1;
    for (int i = 0; i < dim(); ++i) {
        const double u = (x(i) - box_.lo(i)) / (box_.hi(i) - box_.lo(i)) * resolution_;
        const int g = std::clamp(static_cast<int>(std::floor(u + 0.5)), 0, resolution_);
        index += g * stride;
        stride *= resolution_ + 1;
    }
    return index;
}

OrientedPolytope SimplicialComplex::polytope(int j, int index) const
{
    const std::vector<int>& ids = simplex(j, index);
    Matrix pts(dim(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = vertices_.col(ids[i]);
    auto p = OrientedPolytope::simplex(pts);
    if (!p) throw DegenerateError("degenerate complex simplex");
    return *p;
}

void SimplicialComplex::topSimplexRegion(int index, Matrix& a, Vector& b) const
{
    const int d = dim();
    const std::vector<int>& cube = topCube_.at(static_cast<std::size_t>(index));
    const std::vector<int>& perm = topPerm_.at(static_cast<std::size_t>(index));
    Matrix au = Matrix::Zero(d + 1, d);
    Vector bu(d + 1);
    auto c = [&](int axis) { return static_cast<double>(cube[static_cast<std::size_t>(axis)]); };
    const int p0 = perm[0];
    au(0, p0) = 1.0;
    bu(0) = c(p0) + 1.0;
    for (int i = 1; i < d; ++i) {
        const int pi = perm[static_cast<std::size_t>(i)], prev = perm[static_cast<std::size_t>(i - 1)];
        au(i, pi) = 1.0;
        au(i, prev) = -1.0;
        bu(i) = c(pi) - c(prev);
    }
    const int last = perm[static_cast<std::size_t>(d - 1)];
    au(d, last) = -1.0;
    bu(d) = -c(last);
    // u = (x - lo) * n / (hi - lo)
    Vector scale = (box_.hi - box_.lo).cwiseInverse() * resolution_;
    a = au * scale.asDiagonal();
    b = bu + a * box_.lo;
}

std::vector<int> SimplicialComplex::topSimplicesNear(const Vector& lo, const Vector& hi) const
{
    const int d = dim();
    std::vector<int> from(static_cast<std::size_t>(d)), to(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double w = (box_.hi(i) - box_.lo(i)) / resolution_;
        const double ulo = (lo(i) - box_.lo(i)) / w, uhi = (hi(i) - box_.lo(i)) / w;
        from[static_cast<std::size_t>(i)] = std::clamp(static_cast<int>(std::floor(ulo - 1e-9)), 0, resolution_ - 1);
        to[static_cast<std::size_t>(i)] = std::clamp(static_cast<int>(std::floor(uhi + 1e-9)), 0, resolution_ - 1);
    }
    std::vector<int> out;
    for (std::size_t s = 0; s < topCube_.size(); ++s) {
        bool in = true;
        for (int i = 0; i < d && in; ++i) {
            const int ci = topCube_[s][static_cast<std::size_t>(i)];
            in = ci >= from[static_cast<std::size_t>(i)] && ci <= to[static_cast<std::size_t>(i)];
        }
        if (in) out.push_back(static_cast<int>(s));
    }
    return out;
}

// ---------------------------------------------------------------- complex chains

double complexMass(const SimplicialComplex& complex, const ComplexChain& c)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < c.coeffs.size(); ++i)
        if (c.coeffs(i) != 0.0) total += complex.simplexMass(c.k, static_cast<int>(i)) * groupNorm(c.group, c.coeffs(i));
    return total;
}

ComplexChain complexBoundary(const SimplicialComplex& complex, const ComplexChain& c)
{
    if (c.k == 0) throw ArgumentError("boundary of a complex 0-chain");
    ComplexChain out{c.group, c.k - 1, Vector::Zero(complex.count(c.k - 1))};
    const Incidence& inc = complex.boundaryMatrix(c.k);
    for (Eigen::Index j = 0; j < c.coeffs.size(); ++j) {
        if (c.coeffs(j) == 0.0) continue;
        for (const auto& [row, sign] : inc[static_cast<std::size_t>(j)]) out.coeffs(row) += sign * c.coeffs(j);
    }
    for (Eigen::Index i = 0; i < out.coeffs.size(); ++i) out.coeffs(i) = normalizeCoefficient(c.group, out.coeffs(i));
    return out;
}

ComplexChain complexDifference(const ComplexChain& a, const ComplexChain& b)
{
    if (a.k != b.k || a.coeffs.size() != b.coeffs.size()) throw DimensionError("complex chains do not match");
    if (!(a.group == b.group)) throw GroupMismatchError("complex chains use different groups");
    ComplexChain out{a.group, a.k, a.coeffs - b.coeffs};
    for (Eigen::Index i = 0; i < out.coeffs.size(); ++i) out.coeffs(i) = normalizeCoefficient(a.group, out.coeffs(i));
    return out;
}

PolyChain toPolyChain(const SimplicialComplex& complex, const ComplexChain& c)
{
    PolyChain out(complex.space(), c.group, c.k);
    for (Eigen::Index i = 0; i < c.coeffs.size(); ++i)
        if (c.coeffs(i) != 0.0) out.add(c.group.element(c.coeffs(i)), complex.polytope(c.k, static_cast<int>(i)));
    return out;
}

// ---------------------------------------------------------------- embedding

namespace {

struct Embedder {
    const SimplicialComplex& complex;
    const CoefficientGroup& group;
    int k;
    Vector coeffs;
    PolyChain homotopy;
    PolyChain boundaryHomotopy;
    double snapTol;
    bool onGrid = true;

    GroupElement signedElement(const GroupElement& g, int sign) const { return sign > 0 ? g : -g; }

    void addPrism(PolyChain& target, const Matrix& v, const Matrix& w, const GroupElement& g, int sign)
    {
        const Eigen::Index m = v.cols();
        if (m + 1 > complex.dim() + 1) return;
        for (Eigen::Index i = 0; i < m; ++i) {
            Matrix pts(v.rows(), m + 1);
            pts.leftCols(i + 1) = v.leftCols(i + 1);
            pts.rightCols(m - i) = w.rightCols(m - i);
            if (auto s = OrientedPolytope::simplex(pts)) target.add(signedElement(g, (i % 2 == 0) ? sign : -sign), *s);
        }
    }

    void addSimplex(const Matrix& v, const GroupElement& g, int sign)
    {
        const Eigen::Index m = v.cols();
        std::vector<int> ids(static_cast<std::size_t>(m));
        Matrix w(v.rows(), m);
        for (Eigen::Index i = 0; i < m; ++i) {
            ids[static_cast<std::size_t>(i)] = complex.roundToVertex(v.col(i));
            w.col(i) = complex.vertices().col(ids[static_cast<std::size_t>(i)]);
            if ((w.col(i) - v.col(i)).norm() > snapTol) onGrid = false;
        }
        std::vector<int> sorted = ids;
        const int parity = permutationParity(sorted);
        if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) {
            const int idx = complex.find(sorted);
            if (idx < 0) throw Error("snapped simplex is not a face of the complex");
            coeffs(idx) += sign * parity * coefficientValue(g);
        }
        addPrism(homotopy, v, w, g, sign);
        if (m >= 2) {
            for (Eigen::Index f = 0; f < m; ++f) {
                Matrix fv(v.rows(), m - 1), fw(v.rows(), m - 1);
                Eigen::Index c = 0;
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (i == f) continue;
                    fv.col(c) = v.col(i);
                    fw.col(c) = w.col(i);
                    ++c;
                }
                addPrism(boundaryHomotopy, fv, fw, g, (f % 2 == 0) ? sign : -sign);
            }
        }
    }

    void addPiece(const OrientedPolytope& piece, const GroupElement& g)
    {
        const double tol = kRelativeTolerance * std::max(piece.diameter(), 1e-300);
        for (const Matrix& local : piece.cell().triangulate(tol)) {
            const Matrix edges = local.rightCols(local.cols() - 1).colwise() - local.col(0);
            const double det = edges.determinant();
            const int sign = piece.sign() * (det >= 0.0 ? 1 : -1);
            addSimplex(piece.frame().toAmbient(local), g, sign);
        }
    }
};

} // namespace

Embedding embedChain(const PolyChain& chain, const SimplicialComplex& complex)
{
    if (chain.ambientDim() != complex.dim()) throw DimensionError("chain and complex dimensions differ");
    if (!chain.space().sameNorm(complex.space())) throw DimensionError("chain and complex use different norms");
    const PolyChain c = canonicalize(chain);
    const int k = c.k();
    const double scale = (complex.box().hi - complex.box().lo).norm();
    const double boxTol = 1e-9 * scale;
    Embedder e{complex, c.group(), k, Vector::Zero(complex.count(k)), c.emptyLike(k + 1), c.emptyLike(k),
               1e-9 * (complex.box().hi - complex.box().lo).norm() / complex.resolution()};

    for (const SimpleChain& s : c.summands()) {
        const Matrix& verts = s.poly.vertices();
        for (Eigen::Index j = 0; j < verts.cols(); ++j)
            if (!complex.box().contains(verts.col(j), boxTol)) throw ArgumentError("chain support leaves the complex box");
        if (k == 0) {
            e.addSimplex(verts.leftCols(1), s.coeff, 1);
            continue;
        }
        PolyChain remaining = c.emptyLike();
        remaining.add(s);
        const Vector lo = verts.rowwise().minCoeff(), hi = verts.rowwise().maxCoeff();
        for (int top : complex.topSimplicesNear(lo, hi)) {
            if (remaining.isZero()) break;
            Matrix a;
            Vector b;
            complex.topSimplexRegion(top, a, b);
            RegionSplit split = restrictRegion(remaining, a, b);
            for (const SimpleChain& piece : split.inside.summands()) e.addPiece(piece.poly, piece.coeff);
            remaining = std::move(split.outside);
        }
        for (const SimpleChain& piece : remaining.summands())
            if (piece.poly.volume() > 1e-9 * std::pow(scale, k)) throw Error("embedding left part of a summand unassigned");
    }

    Embedding out;
    out.chain = ComplexChain{c.group(), k, e.coeffs};
    for (Eigen::Index i = 0; i < out.chain.coeffs.size(); ++i)
        out.chain.coeffs(i) = normalizeCoefficient(c.group(), out.chain.coeffs(i));
    out.exact = e.onGrid;
    out.discrepancy = out.exact ? 0.0 : mass(canonicalize(e.homotopy)) + mass(canonicalize(e.boundaryHomotopy));
    return out;
}

// ---------------------------------------------------------------- solvers

namespace {

struct Program {
    lp::Problem problem;
    int nq = 0;
    int nk = 0;
};

Program buildProgram(const SimplicialComplex& complex, const ComplexChain& p)
{
    Program prog;
    const int k = p.k;
    prog.nk = complex.count(k);
    prog.nq = k < complex.dim() ? complex.count(k + 1) : 0;
    const int nq = prog.nq, nk = prog.nk;
    lp::Problem& pr = prog.problem;
    pr.num_vars = 2 * nq + 2 * nk;
    pr.objective.resize(static_cast<std::size_t>(pr.num_vars));
    for (int j = 0; j < nq; ++j) {
        pr.objective[static_cast<std::size_t>(j)] = complex.simplexMass(k + 1, j);
        pr.objective[static_cast<std::size_t>(nq + j)] = complex.simplexMass(k + 1, j);
    }
    for (int i = 0; i < nk; ++i) {
        pr.objective[static_cast<std::size_t>(2 * nq + i)] = complex.simplexMass(k, i);
        pr.objective[static_cast<std::size_t>(2 * nq + nk + i)] = complex.simplexMass(k, i);
    }
    std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(nk));
    for (int i = 0; i < nk; ++i) {
        rows[static_cast<std::size_t>(i)].emplace_back(2 * nq + i, 1.0);
        rows[static_cast<std::size_t>(i)].emplace_back(2 * nq + nk + i, -1.0);
    }
    if (nq > 0) {
        const Incidence& inc = complex.boundaryMatrix(k + 1);
        for (int j = 0; j < nq; ++j)
            for (const auto& [row, sign] : inc[static_cast<std::size_t>(j)]) {
                rows[static_cast<std::size_t>(row)].emplace_back(j, sign);
                rows[static_cast<std::size_t>(row)].emplace_back(nq + j, -sign);
            }
    }
    for (int i = 0; i < nk; ++i)
        pr.addRow(std::move(rows[static_cast<std::size_t>(i)]), lp::Sense::Equal, p.coeffs(i));
    return prog;
}

void finishCertificate(const SimplicialComplex& complex, const ComplexChain& p, FlatNormCertificate& cert)
{
    if (cert.filling.k <= complex.dim() && cert.filling.coeffs.size() > 0)
        cert.residual = complexDifference(p, complexBoundary(complex, cert.filling));
    else
        cert.residual = p;
    cert.filling_mass = cert.filling.coeffs.size() > 0 ? complexMass(complex, cert.filling) : 0.0;
    cert.residual_mass = complexMass(complex, cert.residual);
    cert.value = cert.filling_mass + cert.residual_mass;
}

Vector fillingFrom(const Vector& x, int nq)
{
    Vector q(nq);
    for (int j = 0; j < nq; ++j) q(j) = x(j) - x(nq + j);
    return q;
}

bool integral(const Vector& q, double tol, int* fractional)
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double f = std::abs(q(j) - std::round(q(j)));
        if (f > tol && f > worst) {
            worst = f;
            if (fractional) *fractional = static_cast<int>(j);
        }
    }
    return worst == 0.0;
}

FlatNormCertificate solveModular(const SimplicialComplex& complex, const ComplexChain& p, const FlatNormOptions& options)
{
    const std::int64_t m = p.group.modulus();
    const int k = p.k;
    const int nq = k < complex.dim() ? complex.count(k + 1) : 0;
    const int nk = complex.count(k);
    if (m > options.max_modulus || nq > options.max_modular_simplices)
        throw ArgumentError("Z/m flat norms need at most " + std::to_string(options.max_modular_simplices) +
                            " filling simplices and modulus at most " + std::to_string(options.max_modulus));

    std::vector<int> residue(static_cast<std::size_t>(nk));
    for (int i = 0; i < nk; ++i)
        residue[static_cast<std::size_t>(i)] = static_cast<int>(normalizeCoefficient(p.group, p.coeffs(i)));
    std::vector<int> lastIncident(static_cast<std::size_t>(nk), -1);
    const Incidence* inc = nq > 0 ? &complex.boundaryMatrix(k + 1) : nullptr;
    for (int j = 0; j < nq; ++j)
        for (const auto& [row, sign] : (*inc)[static_cast<std::size_t>(j)]) lastIncident[static_cast<std::size_t>(row)] = j;
    std::vector<std::vector<int>> closing(static_cast<std::size_t>(nq + 1));
    for (int i = 0; i < nk; ++i) closing[static_cast<std::size_t>(lastIncident[static_cast<std::size_t>(i)] + 1)].push_back(i);

    auto cost = [&](int r) { return static_cast<double>(std::min<std::int64_t>(r, m - r)); };
    std::vector<int> q(static_cast<std::size_t>(nq), 0), bestQ(q);
    std::vector<int> s = residue;
    double fixed = 0.0;
    for (int i : closing[0]) fixed += complex.simplexMass(k, i) * cost(s[static_cast<std::size_t>(i)]);
    double best = complexMass(complex, p);
    long long nodes = 0;
    bool truncated = false;

    auto recurse = [&](auto&& self, int j, double partial) -> void {
        if (truncated) return;
        if (++nodes > options.max_modular_nodes) {
            truncated = true;
            return;
        }
        if (partial >= best - 1e-12) return;
        if (j == nq) {
            best = partial;
            bestQ = q;
            return;
        }
        for (int v = 0; v < m; ++v) {
            for (const auto& [row, sign] : (*inc)[static_cast<std::size_t>(j)])
                s[static_cast<std::size_t>(row)] = static_cast<int>(((s[static_cast<std::size_t>(row)] - sign * v) % m + m) % m);
            double next = partial + complex.simplexMass(k + 1, j) * cost(v);
            for (int i : closing[static_cast<std::size_t>(j + 1)]) next += complex.simplexMass(k, i) * cost(s[static_cast<std::size_t>(i)]);
            q[static_cast<std::size_t>(j)] = v;
            self(self, j + 1, next);
            for (const auto& [row, sign] : (*inc)[static_cast<std::size_t>(j)])
                s[static_cast<std::size_t>(row)] = static_cast<int>(((s[static_cast<std::size_t>(row)] + sign * v) % m + m) % m);
        }
        q[static_cast<std::size_t>(j)] = 0;
    };
    recurse(recurse, 0, fixed);

    FlatNormCertificate cert;
    cert.mode = FlatMode::Integer;
    cert.solver = "enumeration";
    cert.optimal = !truncated;
    cert.nodes = static_cast<int>(std::min<long long>(nodes, std::numeric_limits<int>::max()));
    cert.filling = ComplexChain{p.group, k + 1, Vector::Zero(nq)};
    for (int j = 0; j < nq; ++j) cert.filling.coeffs(j) = bestQ[static_cast<std::size_t>(j)];
    finishCertificate(complex, p, cert);
    return cert;
}

} // namespace

FlatNormCertificate flatNormUpper(const SimplicialComplex& complex, const ComplexChain& p, const FlatNormOptions& options)
{
    if (p.k < 0 || p.k > complex.dim() || p.coeffs.size() != complex.count(p.k))
        throw DimensionError("complex chain does not match the complex");
    if (p.group.kind() == GroupKind::IntegersModM) return solveModular(complex, p, options);

    FlatNormCertificate cert;
    cert.mode = options.mode;
    cert.solver = "simplex";
    const int nq = p.k < complex.dim() ? complex.count(p.k + 1) : 0;
    cert.filling = ComplexChain{p.group, p.k + 1, Vector::Zero(nq)};
    if (p.isZero() || nq == 0) {
        cert.optimal = true;
        cert.relaxation_integral = true;
        finishCertificate(complex, p, cert);
        return cert;
    }

    Program prog = buildProgram(complex, p);
    lp::Solution sol = lp::solve(prog.problem);
    cert.iterations = sol.iterations;
    if (sol.status != lp::Status::Optimal)
        throw SolverError(std::string("flat norm program stopped: ") + lp::toString(sol.status));
    Vector q = fillingFrom(sol.x, nq);
    int fractional = -1;
    cert.relaxation_integral = integral(q, 1e-7, &fractional);

    if (options.mode == FlatMode::Real) {
        cert.filling.coeffs = q;
        cert.optimal = true;
        cert.nodes = 1;
        finishCertificate(complex, p, cert);
        return cert;
    }

    // Best-first branch and bound on the fractional filling coefficients.
    struct Node {
        double bound;
        std::vector<lp::Row> cuts;
        Vector q;
        int fractional;
        bool operator<(const Node& other) const { return bound > other.bound; }
    };
    FlatNormCertificate best = cert;
    best.filling.coeffs = Vector::Zero(nq);
    finishCertificate(complex, p, best);
    auto consider = [&](const Vector& candidate) {
        FlatNormCertificate c = cert;
        c.filling.coeffs = candidate.array().round().matrix();
        finishCertificate(complex, p, c);
        if (c.value < best.value) best = c;
    };
    std::priority_queue<Node> open;
    if (cert.relaxation_integral) consider(q);
    else open.push(Node{sol.objective, {}, q, fractional});
    int nodes = 1;
    int iterations = sol.iterations;
    bool truncated = false;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= best.value - 1e-9) break;
        if (nodes >= options.max_nodes) {
            truncated = true;
            break;
        }
        for (int dir = 0; dir < 2; ++dir) {
            const int j = node.fractional;
            const double v = dir == 0 ? std::floor(node.q(j)) : std::ceil(node.q(j));
            lp::Problem child = prog.problem;
            std::vector<lp::Row> cuts = node.cuts;
            cuts.push_back(lp::Row{{{j, 1.0}, {nq + j, -1.0}}, dir == 0 ? lp::Sense::LessEqual : lp::Sense::GreaterEqual, v});
            for (const lp::Row& r : cuts) child.rows.push_back(r);
            lp::Solution cs = lp::solve(child);
            ++nodes;
            iterations += cs.iterations;
            if (cs.status == lp::Status::Infeasible) continue;
            if (cs.status != lp::Status::Optimal)
                throw SolverError(std::string("branch-and-bound subproblem stopped: ") + lp::toString(cs.status));
            if (cs.objective >= best.value - 1e-9) continue;
            Vector cq = fillingFrom(cs.x, nq);
            int frac = -1;
            if (integral(cq, 1e-7, &frac)) consider(cq);
            else open.push(Node{cs.objective, std::move(cuts), cq, frac});
        }
    }
    best.nodes = nodes;
    best.iterations = iterations;
    best.optimal = !truncated;
    best.relaxation_integral = cert.relaxation_integral;
    return best;
}

double zeroChainFlatNorm(const PolyChain& p)
{
    if (p.k() != 0) throw ArgumentError("zeroChainFlatNorm needs a 0-chain");
    if (p.group().kind() == GroupKind::IntegersModM)
        throw ArgumentError("zeroChainFlatNorm needs real or integer coefficients");
    const PolyChain canon = canonicalize(p);
    std::vector<Vector> pts;
    std::vector<double> g;
    for (const SimpleChain& s : canon.summands()) {
        pts.push_back(s.poly.vertices().col(0));
        g.push_back(s.coeff.asDouble() * s.poly.sign());
    }
    const int n = static_cast<int>(pts.size());
    if (n == 0) return 0.0;

    // Variables: removal s+_i, s-_i, then one flow per ordered pair.
    lp::Problem pr;
    pr.num_vars = 2 * n + n * (n - 1);
    pr.objective.assign(static_cast<std::size_t>(pr.num_vars), 1.0);
    std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rows[static_cast<std::size_t>(i)].push_back({2 * i, 1.0});
        rows[static_cast<std::size_t>(i)].push_back({2 * i + 1, -1.0});
    }
    int v = 2 * n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            pr.objective[static_cast<std::size_t>(v)] = p.space().norm(pts[static_cast<std::size_t>(j)] - pts[static_cast<std::size_t>(i)]);
            rows[static_cast<std::size_t>(i)].push_back({v, 1.0});
            rows[static_cast<std::size_t>(j)].push_back({v, -1.0});
            ++v;
        }
    for (int i = 0; i < n; ++i)
        pr.addRow(std::move(rows[static_cast<std::size_t>(i)]), lp::Sense::Equal, g[static_cast<std::size_t>(i)]);
    const lp::Solution sol = lp::solve(pr);
    if (sol.status != lp::Status::Optimal)
        throw SolverError(std::string("transport program stopped: ") + lp::toString(sol.status));
    return sol.objective;
}

FlatDistance flatDistance(const PolyChain& a, const PolyChain& b, const SimplicialComplex& complex,
                          const FlatNormOptions& options)
{
    const PolyChain diff = a - b;
    const Embedding e = embedChain(diff, complex);
    FlatDistance out{flatNormUpper(complex, e.chain, options), e.discrepancy, std::nullopt};
    if (diff.k() == 0 && diff.group().kind() != GroupKind::IntegersModM) out.exact = zeroChainFlatNorm(diff);
    return out;
}

std::vector<SweepPoint> refineSweep(const PolyChain& a, const PolyChain& b, const Box& box,
                                    const std::vector<int>& resolutions, const FlatNormOptions& options)
{
    std::vector<SweepPoint> out;
    for (int n : resolutions) {
        const SimplicialComplex complex = SimplicialComplex::build(a.space(), box, n);
        const FlatDistance fd = flatDistance(a, b, complex, options);
        out.push_back(SweepPoint{n, fd.certificate.value, fd.discrepancy});
    }
    return out;
}

} // namespace flatchain
