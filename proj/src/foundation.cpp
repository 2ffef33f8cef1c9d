#include "flatchain/foundation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

#include "flatchain/lp.hpp"
#include "flatchain/optimize.hpp"

namespace flatchain {

struct NormedSpace::CacheSlot {
    std::once_flag once;
    std::shared_ptr<MassDensityCache> cache;
};

// Defined in mass.cpp, where MassDensityCache is complete.
std::shared_ptr<MassDensityCache> makeDensityCache();

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void checkP(double p)
{
    if (!(p >= 1.0))
        throw ArgumentError("p-norm exponent must lie in [1, inf], got " + std::to_string(p));
}

void checkDim(int dim)
{
    if (dim < 1 || dim > NormedSpace::kMaxDim)
        throw DimensionError("ambient dimension must be in 1.." + std::to_string(NormedSpace::kMaxDim));
}

double weightedPNormValue(const Vector& v, const Vector& w, double p)
{
    if (std::isinf(p))
        return (v.cwiseAbs().cwiseProduct(w)).maxCoeff();
    Vector a = v.cwiseAbs().cwiseProduct(w);
    const double m = a.maxCoeff();
    if (m == 0.0)
        return 0.0;
    if (p == 1.0)
        return a.sum();
    if (p == 2.0)
        return a.norm();
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i)
        s += std::pow(a(i) / m, p);
    return m * std::pow(s, 1.0 / p);
}

double conjugate(double p)
{
    if (p == 1.0)
        return kInf;
    if (std::isinf(p))
        return 1.0;
    return p / (p - 1.0);
}

/// max c.t subject to H t <= 1 with t free.
double polytopeSupport(const Matrix& h, const Vector& c)
{
    const int k = static_cast<int>(c.size());
    lp::Problem prob;
    prob.num_vars = 2 * k;
    prob.objective.assign(2 * k, 0.0);
    for (int j = 0; j < k; ++j) {
        prob.objective[j] = -c(j);
        prob.objective[k + j] = c(j);
    }
    for (int r = 0; r < h.rows(); ++r) {
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < k; ++j) {
            if (h(r, j) != 0.0) {
                terms.emplace_back(j, h(r, j));
                terms.emplace_back(k + j, -h(r, j));
            }
        }
        prob.addRow(std::move(terms), lp::Sense::LessEqual, 1.0);
    }
    lp::Solution sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal)
        throw SolverError(std::string("support function LP failed: ") + lp::toString(sol.status));
    return std::max(0.0, -sol.objective);
}

} // namespace

NormedSpace NormedSpace::pNorm(int dim, double p)
{
    checkDim(dim);
    checkP(p);
    NormedSpace s;
    s.dim_ = dim;
    s.kind_ = NormKind::P;
    s.p_ = p;
    s.weights_ = Vector::Ones(dim);
    s.finishSetup();
    return s;
}

NormedSpace NormedSpace::weightedPNorm(const Vector& weights, double p)
{
    checkDim(static_cast<int>(weights.size()));
    checkP(p);
    if ((weights.array() <= 0.0).any() || !weights.allFinite())
        throw ArgumentError("weighted p-norm weights must be positive and finite");
    NormedSpace s;
    s.dim_ = static_cast<int>(weights.size());
    s.kind_ = NormKind::WeightedP;
    s.p_ = p;
    s.weights_ = weights;
    s.finishSetup();
    return s;
}

NormedSpace NormedSpace::polytopeNorm(const Matrix& facets)
{
    checkDim(static_cast<int>(facets.cols()));
    if (facets.rows() == 0 || !facets.allFinite())
        throw ArgumentError("polytope norm needs a finite, nonempty facet list");
    const double scale = facets.cwiseAbs().maxCoeff();
    for (int i = 0; i < facets.rows(); ++i) {
        bool found = false;
        for (int j = 0; j < facets.rows() && !found; ++j)
            found = (facets.row(i) + facets.row(j)).cwiseAbs().maxCoeff() <= 1e-12 * scale;
        if (!found)
            throw ArgumentError("polytope norm facets must be centrally symmetric (facet " +
                                std::to_string(i) + " has no negative partner)");
    }
    Eigen::FullPivLU<Matrix> lu(facets);
    lu.setThreshold(1e-10);
    if (lu.rank() < facets.cols())
        throw DegenerateError("polytope norm facets do not span the dual space (unit ball unbounded)");
    NormedSpace s;
    s.dim_ = static_cast<int>(facets.cols());
    s.kind_ = NormKind::Polytope;
    s.p_ = 0.0;
    s.weights_ = Vector::Ones(s.dim_);
    s.facets_ = facets;
    s.finishSetup();
    return s;
}

void NormedSpace::finishSetup()
{
    if (kind_ == NormKind::Polytope) {
        ballFacets_ = facets_;
    } else if (p_ == 1.0) {
        const int count = 1 << dim_;
        ballFacets_.resize(count, dim_);
        for (int mask = 0; mask < count; ++mask)
            for (int i = 0; i < dim_; ++i)
                ballFacets_(mask, i) = ((mask >> i) & 1 ? -1.0 : 1.0) * weights_(i);
    } else if (std::isinf(p_)) {
        ballFacets_ = Matrix::Zero(2 * dim_, dim_);
        for (int i = 0; i < dim_; ++i) {
            ballFacets_(2 * i, i) = weights_(i);
            ballFacets_(2 * i + 1, i) = -weights_(i);
        }
    }
    cache_ = std::make_shared<CacheSlot>();
}

double NormedSpace::norm(const Vector& v) const
{
    if (v.size() != dim_)
        throw DimensionError("norm: vector has length " + std::to_string(v.size()) + ", space has dim " +
                             std::to_string(dim_));
    if (kind_ == NormKind::Polytope)
        return std::max(0.0, (facets_ * v).maxCoeff());
    return weightedPNormValue(v, weights_, p_);
}

double NormedSpace::dualNorm(const Vector& covector) const
{
    if (covector.size() != dim_)
        throw DimensionError("dual_norm: covector has length " + std::to_string(covector.size()) +
                             ", space has dim " + std::to_string(dim_));
    if (covector.isZero(0.0))
        return 0.0;
    if (kind_ == NormKind::Polytope)
        return polytopeSupport(facets_, covector);
    Vector scaled = covector.cwiseQuotient(weights_);
    return weightedPNormValue(scaled, Vector::Ones(dim_), conjugate(p_));
}

bool NormedSpace::isEuclidean() const
{
    return kind_ != NormKind::Polytope && p_ == 2.0 && (weights_.array() == 1.0).all();
}

bool NormedSpace::isPolyhedral() const
{
    return kind_ == NormKind::Polytope || p_ == 1.0 || std::isinf(p_);
}

std::string NormedSpace::describe() const
{
    std::ostringstream os;
    if (kind_ == NormKind::Polytope) {
        os << "polytope[" << facets_.rows() << " facets]";
    } else {
        if (kind_ == NormKind::WeightedP)
            os << "weighted-";
        if (std::isinf(p_))
            os << "linf";
        else
            os << "l" << p_;
    }
    os << "(d=" << dim_ << ")";
    return os.str();
}

MassDensityCache& NormedSpace::densityCache() const
{
    std::call_once(cache_->once, [this] { cache_->cache = makeDensityCache(); });
    return *cache_->cache;
}

bool NormedSpace::sameNorm(const NormedSpace& other) const
{
    if (dim_ != other.dim_ || kind_ != other.kind_)
        return false;
    if (kind_ == NormKind::Polytope)
        return facets_.rows() == other.facets_.rows() && facets_ == other.facets_;
    return p_ == other.p_ && weights_ == other.weights_;
}

Functional Functional::make(const NormedSpace& space, const Vector& covector)
{
    Functional f;
    f.covector = covector;
    f.dual_norm = space.dualNorm(covector);
    return f;
}

double norm(const NormedSpace& space, const Vector& v) { return space.norm(v); }
double dualNorm(const NormedSpace& space, const Functional& f) { return space.dualNorm(f.covector); }
double dualNorm(const NormedSpace& space, const Vector& covector) { return space.dualNorm(covector); }

double subspaceDualNorm(const NormedSpace& space, const Matrix& basis, const Vector& values)
{
    const int d = space.dim();
    const int k = static_cast<int>(basis.cols());
    if (basis.rows() != d)
        throw DimensionError("subspace_dual_norm: basis vectors must have length " + std::to_string(d));
    if (values.size() != k)
        throw DimensionError("subspace_dual_norm: one value per basis vector required");
    if (k == 0)
        return 0.0;
    Eigen::JacobiSVD<Matrix> svd(basis);
    const Vector sv = svd.singularValues();
    if (sv(k - 1) <= 1e-10 * std::max(1.0, sv(0)))
        throw DegenerateError("subspace_dual_norm: basis vectors are linearly dependent");
    if (values.isZero(0.0))
        return 0.0;

    if (space.kind() != NormKind::Polytope && space.p() == 2.0) {
        Matrix b = space.weights().asDiagonal() * basis;
        Matrix gram = b.transpose() * b;
        return std::sqrt(std::max(0.0, values.dot(gram.ldlt().solve(values))));
    }
    if (space.isPolyhedral())
        return polytopeSupport(space.ballFacets() * basis, values);

    // Smooth p-norm: sup of a quasi-concave ratio over the subspace sphere.
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ() * Matrix::Identity(d, k);
    Matrix r = q.transpose() * basis;
    Vector c = r.transpose().triangularView<Eigen::Lower>().solve(values);
    auto ratio = [&](const Vector& u) {
        const double n = space.norm(q * u);
        return n > 0 ? std::abs(c.dot(u)) / n : 0.0;
    };
    SphereSearchOptions opt;
    opt.starts = 32;
    opt.refine_top = 2;
    opt.step_tolerance = 1e-10;
    double best = maximizeOnSphere(k, ratio, opt).value;
    best = std::max(best, ratio(c.normalized()));
    return best;
}

// ---------------------------------------------------------------------------
// Sphere search

std::vector<Vector> sphereStarts(int dim, int count, bool antipodal, std::uint64_t seed)
{
    std::vector<Vector> out;
    if (dim == 1) {
        out.push_back(Vector::Ones(1));
        if (!antipodal)
            out.push_back(-Vector::Ones(1));
        return out;
    }
    if (dim == 2) {
        const double span = antipodal ? M_PI : 2.0 * M_PI;
        for (int j = 0; j < count; ++j) {
            const double t = span * j / count;
            Vector u(2);
            u << std::cos(t), std::sin(t);
            out.push_back(u);
        }
        return out;
    }
    if (dim == 3) {
        // Fibonacci lattice; antipodal searches use the upper hemisphere.
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < count; ++j) {
            const double z = antipodal ? 1.0 - (j + 0.5) / count : 1.0 - 2.0 * (j + 0.5) / count;
            const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * j;
            Vector u(3);
            u << rad * std::cos(phi), rad * std::sin(phi), z;
            out.push_back(u);
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < dim; ++i) {
        out.push_back(Vector::Unit(dim, i));
        if (!antipodal)
            out.push_back(-Vector::Unit(dim, i));
    }
    while (static_cast<int>(out.size()) < count) {
        Vector u(dim);
        for (int i = 0; i < dim; ++i)
            u(i) = gauss(rng);
        if (u.norm() > 1e-6)
            out.push_back(u.normalized());
    }
    return out;
}

namespace {

/// Orthonormal basis of the tangent space at unit vector u (dim x dim-1).
Matrix tangentBasis(const Vector& u)
{
    const int n = static_cast<int>(u.size());
    Eigen::HouseholderQR<Matrix> qr(u);
    Matrix q = qr.householderQ();
    return q.rightCols(n - 1);
}

std::vector<Vector> compassDirections(int m)
{
    std::vector<Vector> dirs;
    int total = 1;
    for (int i = 0; i < m; ++i)
        total *= 3;
    for (int code = 0; code < total; ++code) {
        Vector v(m);
        int c = code;
        for (int i = 0; i < m; ++i) {
            v(i) = static_cast<double>(c % 3) - 1.0;
            c /= 3;
        }
        if (v.squaredNorm() > 0)
            dirs.push_back(v.normalized());
    }
    // Axis directions first so the common case converges quickly.
    std::stable_sort(dirs.begin(), dirs.end(), [](const Vector& a, const Vector& b) {
        return (a.array() != 0.0).count() < (b.array() != 0.0).count();
    });
    return dirs;
}

} // namespace

SphereSearchResult maximizeOnSphere(int dim, const std::function<double(const Vector&)>& f,
                                    const SphereSearchOptions& options)
{
    SphereSearchResult res;
    std::vector<Vector> starts = sphereStarts(dim, options.starts, options.antipodal, options.seed);
    for (const Vector& e : options.extra_starts)
        if (e.norm() > 0) starts.push_back(e.normalized());
    res.starts = static_cast<int>(starts.size());
    std::vector<std::pair<double, int>> scored;
    for (int i = 0; i < static_cast<int>(starts.size()); ++i) {
        scored.emplace_back(f(starts[i]), i);
        ++res.evaluations;
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    res.value = scored.front().first;
    res.argmax = starts[scored.front().second];
    if (dim == 1)
        return res;

    const double initialStep = (options.antipodal ? M_PI : 2.0 * M_PI) / std::max(4, options.starts);
    const int top = std::min<int>(options.refine_top, static_cast<int>(scored.size()));
    const std::vector<Vector> dirs = compassDirections(dim - 1);
    for (int s = 0; s < top; ++s) {
        Vector u = starts[scored[s].second];
        double val = scored[s].first;
        double step = initialStep;
        while (step > options.step_tolerance && res.evaluations < options.max_evaluations) {
            Matrix t = tangentBasis(u);
            bool moved = false;
            for (const Vector& dir : dirs) {
                Vector cand = (u + std::tan(step) * (t * dir)).normalized();
                const double v = f(cand);
                ++res.evaluations;
                if (v > val) {
                    val = v;
                    u = cand;
                    moved = true;
                    break;
                }
            }
            if (!moved)
                step *= 0.5;
        }
        if (val > res.value) {
            res.value = val;
            res.argmax = u;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Coefficient groups

GroupElement GroupElement::integer(std::int64_t n)
{
    GroupElement g;
    g.kind_ = GroupKind::Integers;
    g.n_ = n;
    return g;
}

GroupElement GroupElement::modular(std::int64_t residue, std::int64_t modulus)
{
    if (modulus < 2)
        throw ArgumentError("Z/m requires m >= 2");
    GroupElement g;
    g.kind_ = GroupKind::IntegersModM;
    g.modulus_ = modulus;
    g.n_ = ((residue % modulus) + modulus) % modulus;
    return g;
}

GroupElement GroupElement::real(double x)
{
    GroupElement g;
    g.kind_ = GroupKind::Reals;
    g.x_ = x;
    return g;
}

double GroupElement::asDouble() const
{
    return kind_ == GroupKind::Reals ? x_ : static_cast<double>(n_);
}

double GroupElement::norm() const
{
    switch (kind_) {
    case GroupKind::Integers: return static_cast<double>(n_ < 0 ? -n_ : n_);
    case GroupKind::IntegersModM: return static_cast<double>(std::min(n_, modulus_ - n_));
    case GroupKind::Reals: return std::abs(x_);
    }
    return 0.0;
}

bool GroupElement::isZero() const
{
    return kind_ == GroupKind::Reals ? x_ == 0.0 : n_ == 0;
}

bool GroupElement::isNegligible(double tol) const
{
    return kind_ == GroupKind::Reals ? std::abs(x_) <= tol : n_ == 0;
}

void GroupElement::checkCompatible(const GroupElement& other) const
{
    if (kind_ != other.kind_)
        throw GroupMismatchError("coefficient group kinds differ");
    if (modulus_ != other.modulus_)
        throw GroupMismatchError("coefficient moduli differ (" + std::to_string(modulus_) + " vs " +
                                 std::to_string(other.modulus_) + ")");
}

GroupElement GroupElement::operator-() const
{
    switch (kind_) {
    case GroupKind::Integers: return integer(-n_);
    case GroupKind::IntegersModM: return modular(-n_, modulus_);
    case GroupKind::Reals: return real(-x_);
    }
    return *this;
}

GroupElement GroupElement::operator+(const GroupElement& other) const
{
    checkCompatible(other);
    switch (kind_) {
    case GroupKind::Integers: return integer(n_ + other.n_);
    case GroupKind::IntegersModM: return modular(n_ + other.n_, modulus_);
    case GroupKind::Reals: return real(x_ + other.x_);
    }
    return *this;
}

GroupElement GroupElement::operator-(const GroupElement& other) const { return *this + (-other); }

bool GroupElement::operator==(const GroupElement& other) const
{
    return kind_ == other.kind_ && modulus_ == other.modulus_ && n_ == other.n_ && x_ == other.x_;
}

std::string GroupElement::toString() const
{
    if (kind_ == GroupKind::Reals) {
        std::ostringstream os;
        os.precision(17);
        os << x_;
        return os.str();
    }
    return std::to_string(n_);
}

CoefficientGroup CoefficientGroup::integersMod(std::int64_t m)
{
    if (m < 2)
        throw ArgumentError("Z/m requires m >= 2, got " + std::to_string(m));
    return CoefficientGroup(GroupKind::IntegersModM, m);
}

GroupElement CoefficientGroup::zero() const { return element(0.0); }

GroupElement CoefficientGroup::element(double value) const
{
    if (!std::isfinite(value))
        throw ArgumentError("coefficient must be finite");
    if (kind_ == GroupKind::Reals)
        return GroupElement::real(value);
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9)
        throw ArgumentError("integer coefficient group got non-integral value " + std::to_string(value));
    const auto n = static_cast<std::int64_t>(r);
    if (kind_ == GroupKind::Integers)
        return GroupElement::integer(n);
    return GroupElement::modular(n, modulus_);
}

bool CoefficientGroup::contains(const GroupElement& g) const
{
    return g.kind() == kind_ && g.modulus() == modulus_;
}

std::string CoefficientGroup::describe() const
{
    switch (kind_) {
    case GroupKind::Integers: return "Z";
    case GroupKind::IntegersModM: return "Z/" + std::to_string(modulus_);
    case GroupKind::Reals: return "R";
    }
    return "?";
}

} // namespace flatchain
