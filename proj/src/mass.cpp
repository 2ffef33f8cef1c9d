#include "flatchain/mass.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "flatchain/errors.hpp"
#include "flatchain/optimize.hpp"

namespace flatchain {

std::shared_ptr<MassDensityCache> makeDensityCache() { return std::make_shared<MassDensityCache>(); }

// ---------------------------------------------------------------- cache

std::optional<DensityReport> MassDensityCache::find(const PlaneKey& key) const
{
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [k, r] : entries_)
        if (k.matches(key)) return r;
    return std::nullopt;
}

DensityReport MassDensityCache::insert(const PlaneKey& key, const DensityReport& report)
{
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [k, r] : entries_)
        if (k.matches(key)) return r;
    entries_.emplace_back(key, report);
    return report;
}

std::size_t MassDensityCache::size() const
{
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

void MassDensityCache::clear()
{
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.clear();
}

// ---------------------------------------------------------------- restricted norm

namespace {

/// Vertices of {t : h_j . t <= 1} in R^k by brute-force enumeration.
Matrix sectionVertices(const Matrix& h)
{
    const int m = static_cast<int>(h.rows());
    const int k = static_cast<int>(h.cols());
    std::vector<Vector> pts;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k > m) throw DegenerateError("restricted unit ball is unbounded");
    while (true) {
        Matrix a(k, k);
        for (int j = 0; j < k; ++j) a.row(j) = h.row(idx[j]);
        Eigen::FullPivLU<Matrix> lu(a);
        lu.setThreshold(1e-11);
        if (lu.rank() == k) {
            Vector x = lu.solve(Vector::Ones(k));
            if ((h * x).maxCoeff() <= 1.0 + 1e-10) pts.push_back(x);
        }
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (pts.empty()) throw DegenerateError("restricted unit ball has no vertices");
    Matrix out(k, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts[i];
    return out;
}

} // namespace

RestrictedNorm::RestrictedNorm(const NormedSpace& space, const Matrix& basis) : space_(&space), basis_(basis)
{
    if (space.kind() != NormKind::Polytope && space.p() == 2.0) {
        quadratic_ = true;
        Matrix b = space.weights().asDiagonal() * basis;
        gramInv_ = (b.transpose() * b).inverse();
    } else if (space.isPolyhedral()) {
        polyhedral_ = true;
        ballVertices_ = sectionVertices(space.ballFacets() * basis);
    }
}

double RestrictedNorm::norm(const Vector& t) const { return space_->norm(basis_ * t); }

double RestrictedNorm::dual(const Vector& c) const
{
    if (quadratic_) return std::sqrt(std::max(0.0, c.dot(gramInv_ * c)));
    if (polyhedral_) return std::max(0.0, (c.transpose() * ballVertices_).maxCoeff());
    return subspaceDualNorm(*space_, basis_, c);
}

Vector RestrictedNorm::normingVector(const Vector& c) const
{
    if (quadratic_) {
        Vector v = gramInv_ * c;
        return v / std::sqrt(c.dot(v));
    }
    if (polyhedral_) {
        Eigen::Index best = 0;
        (c.transpose() * ballVertices_).maxCoeff(&best);
        return ballVertices_.col(best);
    }
    const int k = dim();
    auto ratio = [&](const Vector& u) { return c.dot(u) / norm(u); };
    SphereSearchOptions opt;
    opt.antipodal = false;
    opt.starts = 32;
    opt.step_tolerance = 1e-10;
    Vector u = maximizeOnSphere(k, ratio, opt).argmax;
    return u / norm(u);
}

// ---------------------------------------------------------------- density

namespace {

double sigmaRecursive(const NormedSpace& space, const Matrix& e, const SphereSearchOptions& opt, DensityReport* report)
{
    const int k = static_cast<int>(e.cols());
    if (k == 1) return space.norm(e.col(0));
    RestrictedNorm rn(space, e);
    auto objective = [&](const Vector& a) {
        double dn = rn.dual(a);
        if (!(dn > 0)) return 0.0;
        return sigmaRecursive(space, e * complementBasis(a), opt, nullptr) / dn;
    };
    SphereSearchResult res = maximizeOnSphere(k, objective, opt);
    if (report) {
        report->starts = res.starts;
        report->evaluations = res.evaluations;
        report->best_functional = e * res.argmax / rn.dual(res.argmax);
        report->tolerance = opt.step_tolerance;
    }
    return res.value;
}

} // namespace

DensityReport densityReport(const NormedSpace& space, const PlaneKey& plane)
{
    const int k = plane.dim();
    if (k < 1 || k > space.dim() || plane.ambientDim() != space.dim())
        throw DegenerateError("density: plane dimension out of range");
    MassDensityCache& cache = space.densityCache();
    if (auto hit = cache.find(plane)) return *hit;

    DensityReport rep;
    if (space.isEuclidean()) {
        rep.sigma = 1.0;
        rep.best_functional = plane.basis().col(0);
    } else {
        SphereSearchOptions opt;
        opt.starts = 64;
        opt.refine_top = 4;
        opt.step_tolerance = 1e-8;
        rep.sigma = sigmaRecursive(space, plane.basis(), opt, &rep);
        if (k == 1) {
            rep.starts = 1;
            rep.evaluations = 1;
            Vector u = plane.basis().col(0);
            rep.best_functional = u / RestrictedNorm(space, plane.basis()).dual(Vector::Ones(1));
        }
    }
    if (!(rep.sigma > 0)) throw DegenerateError("density: nonpositive density");
    return cache.insert(plane, rep);
}

double density(const NormedSpace& space, const PlaneKey& plane) { return densityReport(space, plane).sigma; }

// ---------------------------------------------------------------- mass

double mass(const NormedSpace& space, const SimpleChain& s)
{
    const double g = s.coeff.norm();
    if (s.poly.k() == 0 || g == 0.0) return g;
    return g * density(space, s.poly.frame().key) * s.poly.volume();
}

MassBreakdown massBreakdown(const PolyChain& chain)
{
    MassBreakdown out;
    for (const auto& s : chain.summands()) {
        SummandMass m;
        m.coeff_norm = s.coeff.norm();
        m.density = chain.k() == 0 ? 1.0 : density(chain.space(), s.poly.frame().key);
        m.volume = chain.k() == 0 ? 1.0 : s.poly.volume();
        m.mass = m.coeff_norm * m.density * m.volume;
        out.total += m.mass;
        out.summands.push_back(m);
    }
    return out;
}

double mass(const PolyChain& chain)
{
    double total = 0.0;
    for (const auto& s : chain.summands()) total += mass(chain.space(), s);
    return total;
}

double canonicalMass(const PolyChain& chain) { return mass(canonicalize(chain)); }

// ---------------------------------------------------------------- direct oracle

GaussRule gaussLegendre(int n)
{
    // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
    Matrix j = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double b = i / std::sqrt(4.0 * i * i - 1.0);
        j(i, i - 1) = b;
        j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(j);
    GaussRule r;
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(0.5 * (es.eigenvalues()(i) + 1.0));
        double v = es.eigenvectors()(0, i);
        r.weights.push_back(v * v);  // sums to 1 on [0, 1]
    }
    return r;
}


namespace {

std::vector<Vector> dualVertices(const NormedSpace& space)
{
    std::vector<Vector> out;
    if (!space.isPolyhedral()) return out;
    for (Eigen::Index i = 0; i < space.ballFacets().rows(); ++i) out.push_back(space.ballFacets().row(i).transpose());
    return out;
}

int defaultResolution(int d)
{
    switch (d) {
    case 1: return 1;
    case 2: return 360;
    case 3: return 800;
    default: return 2000;
    }
}

/// Direct mass of the polytope given as a union of ambient k-simplices, coefficient 1.
double directMass(const NormedSpace& space, const std::vector<Matrix>& simplices, int k, const DirectGrid& grid,
                  double tol)
{
    const int d = space.dim();
    if (k == 1) {
        double total = 0.0;
        if (simplices.size() == 1) {
            Vector v = simplices[0].col(1) - simplices[0].col(0);
            SphereSearchOptions opt;
            opt.starts = grid.functional_resolution > 0 ? grid.functional_resolution : defaultResolution(d);
            opt.extra_starts = dualVertices(space);
            opt.refine_top = 3;
            opt.step_tolerance = 1e-9;
            auto f = [&](const Vector& u) { return std::abs(u.dot(v)) / space.dualNorm(u); };
            return maximizeOnSphere(d, f, opt).value;
        }
        for (const Matrix& s : simplices) total += space.norm(s.col(1) - s.col(0));
        return total;
    }

    const GaussRule rule = gaussLegendre(std::max(1, grid.integral_steps));
    Matrix e = PlaneKey::fromSpan(simplices[0].rightCols(k).colwise() - simplices[0].col(0)).basis();

    auto integral = [&](const Vector& u) -> double {
        const double dn = space.dualNorm(u);
        Vector a = e.transpose() * u;
        if (!(dn > 0) || a.norm() <= 1e-14 * u.norm()) return 0.0;
        std::vector<double> levels;
        for (const Matrix& s : simplices)
            for (int i = 0; i < s.cols(); ++i) levels.push_back(u.dot(s.col(i)));
        std::sort(levels.begin(), levels.end());

        // Slice plane and, for k >= 3, mass per unit volume on it.
        Matrix sliceBasis = e * complementBasis(a.normalized());
        double ratio = 1.0;
        if (k >= 3) {
            double bestVol = 0.0;
            std::optional<ConvexCell> bestCell;
            double mid = 0.5 * (levels.front() + levels.back());
            for (const Matrix& s : simplices) {
                Matrix pts = simplexSlice(s, u, mid);
                if (pts.cols() < k) continue;
                auto c = ConvexCell::fromPoints(sliceBasis.transpose() * pts, tol);
                if (c && c->volume() > bestVol) {
                    bestVol = c->volume();
                    bestCell = c;
                }
            }
            if (!bestCell) return 0.0;
            Matrix piece = bestCell->triangulate(tol).front();
            Matrix amb = sliceBasis * piece;
            double vol = simplexVolume(amb);
            ratio = directMass(space, {amb}, k - 1, grid, tol) / vol;
        }

        double total = 0.0;
        for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
            const double lo = levels[i], hi = levels[i + 1];
            if (hi - lo <= 0.0) continue;
            double part = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double x = lo + rule.nodes[q] * (hi - lo);
                double m = 0.0;
                for (const Matrix& s : simplices) {
                    Matrix pts = simplexSlice(s, u, x);
                    if (k == 2) {
                        if (pts.cols() >= 2) {
                            double best = 0.0;
                            for (int p = 1; p < pts.cols(); ++p)
                                best = std::max(best, space.norm(pts.col(p) - pts.col(0)));
                            m += best;
                        }
                    } else if (pts.cols() >= k) {
                        auto c = ConvexCell::fromPoints(sliceBasis.transpose() * pts, tol);
                        if (c) m += ratio * c->volume();
                    }
                }
                part += rule.weights[q] * m;
            }
            total += part * (hi - lo);
        }
        return total / dn;
    };

    SphereSearchOptions opt;
    opt.starts = grid.functional_resolution > 0 ? grid.functional_resolution : defaultResolution(d);
    opt.extra_starts = dualVertices(space);
    opt.refine_top = 3;
    opt.step_tolerance = 1e-7;
    return maximizeOnSphere(d, integral, opt).value;
}

} // namespace

double massDirect(const NormedSpace& space, const SimpleChain& s, const DirectGrid& grid)
{
    const int k = s.poly.k();
    if (k == 0) throw ArgumentError("mass_direct needs k >= 1");
    const double tol = kRelativeTolerance * std::max(s.poly.diameter(), 1e-300);
    std::vector<Matrix> simplices;
    for (const Matrix& local : s.poly.cell().triangulate(tol)) simplices.push_back(s.poly.frame().toAmbient(local));
    return s.coeff.norm() * directMass(space, simplices, k, grid, tol);
}

// ---------------------------------------------------------------- size and fullness

double size(const NormedSpace& space, const OrientedPolytope& p)
{
    if (p.k() == 0) return 1.0;
    return density(space, p.frame().key) * p.volume();
}

double size(const PolyChain& chain)
{
    double total = 0.0;
    const PolyChain canon = canonicalize(chain);
    for (const auto& s : canon.summands()) total += size(chain.space(), s.poly);
    return total;
}

double normDiameter(const NormedSpace& space, const Matrix& vertices)
{
    double best = 0.0;
    for (int i = 0; i < vertices.cols(); ++i)
        for (int j = i + 1; j < vertices.cols(); ++j)
            best = std::max(best, space.norm(vertices.col(i) - vertices.col(j)));
    return best;
}

double fullness(const NormedSpace& space, const OrientedPolytope& p)
{
    if (p.k() == 0) return 1.0;
    double diam = normDiameter(space, p.vertices());
    if (!(diam > 0)) throw DegenerateError("fullness of a degenerate polytope");
    return size(space, p) / std::pow(diam, p.k());
}

double fullness(const PolyChain& chain)
{
    PolyChain c = canonicalize(chain);
    if (c.isZero()) throw DegenerateError("fullness of the zero chain");
    Matrix all(c.ambientDim(), 0);
    for (const auto& s : c.summands()) {
        Matrix grown(all.rows(), all.cols() + s.poly.vertices().cols());
        grown << all, s.poly.vertices();
        all = grown;
    }
    if (c.k() == 0) return 1.0;
    double diam = normDiameter(c.space(), all);
    if (!(diam > 0)) throw DegenerateError("fullness of a degenerate chain");
    return size(c) / std::pow(diam, c.k());
}

FullSimplex fullSimplex(const NormedSpace& space, const PlaneKey& plane)
{
    const int k = plane.dim();
    if (k < 1 || plane.ambientDim() != space.dim()) throw DegenerateError("full_simplex: bad plane");
    const Matrix& e = plane.basis();
    RestrictedNorm rn(space, e);

    Matrix local = Matrix::Zero(k, k + 1);
    Vector first = Vector::Unit(k, 0);
    local.col(1) = first / rn.norm(first);
    for (int j = 1; j < k; ++j) {
        Eigen::HouseholderQR<Matrix> qr{Matrix(local.middleCols(1, j))};
        Matrix q = qr.householderQ() * Matrix::Identity(k, k);
        Vector a = q.col(j);
        std::vector<Vector> candidates;
        if (rn.polyhedral()) {
            Vector vals = a.transpose() * rn.ballVertices();
            const double top = vals.maxCoeff();
            for (int i = 0; i < vals.size(); ++i)
                if (vals(i) >= top - 1e-12 * std::max(1.0, std::abs(top))) candidates.push_back(rn.ballVertices().col(i));
        } else {
            candidates.push_back(rn.normingVector(a));
        }
        // Among ties, keep the apex giving the fullest face so far.
        double bestTheta = -1.0;
        Vector bestApex = candidates.front();
        for (const Vector& apex : candidates) {
            Matrix face = local.leftCols(j + 2);
            face.col(j + 1) = apex;
            Matrix amb = e * face;
            double vol = simplexVolume(amb);
            double theta = vol / std::pow(normDiameter(space, amb), j + 1);
            if (theta > bestTheta + 1e-12) {
                bestTheta = theta;
                bestApex = apex;
            }
        }
        local.col(j + 1) = bestApex;
    }
    auto simplex = OrientedPolytope::simplex(e * local);
    if (!simplex) throw DegenerateError("full_simplex: construction degenerated");
    FullSimplex out{*simplex, 0.0};
    out.fullness = fullness(space, *simplex);
    return out;
}

ChainNorms chainNorms(const PolyChain& chain)
{
    ChainNorms n;
    PolyChain c = canonicalize(chain);
    n.mass = mass(c);
    n.boundary_mass = c.k() == 0 ? 0.0 : mass(boundary(c));
    n.n_value = n.mass + n.boundary_mass;
    return n;
}

} // namespace flatchain
