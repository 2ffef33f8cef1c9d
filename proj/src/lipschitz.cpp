#include "flatchain/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "flatchain/errors.hpp"
#include "flatchain/lp.hpp"

namespace flatchain {

namespace {

/// Euclidean minimum-norm point of a polytope given by its points (Wolfe's method).
double wolfeMinNorm(const Matrix& p)
{
    const int n = static_cast<int>(p.cols());
    const double scale = std::max(1e-300, p.colwise().squaredNorm().maxCoeff());
    const double eps = 1e-12;
    Eigen::Index start = 0;
    p.colwise().squaredNorm().minCoeff(&start);
    std::vector<int> s{static_cast<int>(start)};
    std::vector<double> lambda{1.0};
    Vector x = p.col(start);

    for (int major = 0; major < 10 * n + 50; ++major) {
        Eigen::Index j = 0;
        Vector dots = p.transpose() * x;
        dots.minCoeff(&j);
        if (dots(j) >= x.squaredNorm() - eps * scale) break;
        if (std::find(s.begin(), s.end(), static_cast<int>(j)) != s.end()) break;
        s.push_back(static_cast<int>(j));
        lambda.push_back(0.0);

        for (int minor = 0; minor < 10 * n + 50; ++minor) {
            const int m = static_cast<int>(s.size());
            Matrix kkt = Matrix::Zero(m + 1, m + 1);
            for (int a = 0; a < m; ++a) {
                for (int b = 0; b < m; ++b) kkt(a, b) = p.col(s[a]).dot(p.col(s[b]));
                kkt(a, m) = 1.0;
                kkt(m, a) = 1.0;
            }
            Vector rhs = Vector::Zero(m + 1);
            rhs(m) = 1.0;
            Vector mu = kkt.fullPivLu().solve(rhs).head(m);
            bool interior = true;
            for (int a = 0; a < m; ++a)
                if (mu(a) <= eps) interior = false;
            if (interior) {
                for (int a = 0; a < m; ++a) lambda[a] = mu(a);
                break;
            }
            double theta = 1.0;
            for (int a = 0; a < m; ++a)
                if (mu(a) <= eps && lambda[a] - mu(a) > 0) theta = std::min(theta, lambda[a] / (lambda[a] - mu(a)));
            std::vector<int> ns;
            std::vector<double> nl;
            for (int a = 0; a < m; ++a) {
                double v = theta * mu(a) + (1.0 - theta) * lambda[a];
                if (v > eps) {
                    ns.push_back(s[a]);
                    nl.push_back(v);
                }
            }
            if (ns.empty()) {
                ns.push_back(s.back());
                nl.push_back(1.0);
            }
            double total = 0.0;
            for (double v : nl) total += v;
            for (double& v : nl) v /= total;
            s = ns;
            lambda = nl;
        }
        x.setZero();
        for (std::size_t a = 0; a < s.size(); ++a) x += lambda[a] * p.col(s[a]);
    }
    return x.norm();
}

double polyhedralMinNorm(const Matrix& facets, const Matrix& p)
{
    const int n = static_cast<int>(p.cols());
    lp::Problem prob;
    prob.num_vars = n + 1;
    prob.objective.assign(n + 1, 0.0);
    prob.objective[n] = 1.0;
    Matrix hp = facets * p;
    for (int r = 0; r < hp.rows(); ++r) {
        std::vector<std::pair<int, double>> terms;
        for (int i = 0; i < n; ++i)
            if (hp(r, i) != 0.0) terms.emplace_back(i, hp(r, i));
        terms.emplace_back(n, -1.0);
        prob.addRow(std::move(terms), lp::Sense::LessEqual, 0.0);
    }
    std::vector<std::pair<int, double>> sum;
    for (int i = 0; i < n; ++i) sum.emplace_back(i, 1.0);
    prob.addRow(std::move(sum), lp::Sense::Equal, 1.0);
    lp::Solution sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal) throw SolverError(std::string("min-norm LP failed: ") + lp::toString(sol.status));
    return std::max(0.0, sol.objective);
}

void projectToSimplex(Vector& v)
{
    Vector u = v;
    std::sort(u.data(), u.data() + u.size(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        css += u(i);
        double t = (css - 1.0) / (i + 1);
        if (u(i) - t > 0) theta = t;
    }
    v = (v.array() - theta).max(0.0);
}

/// Lower bound on min ||P lambda|| for smooth p-norms (projected gradient plus duality gap).
double smoothMinNorm(const NormedSpace& space, const Matrix& p)
{
    const int n = static_cast<int>(p.cols());
    const Vector& w = space.weights();
    const double q = space.p();
    auto value = [&](const Vector& lam) { return space.norm(p * lam); };
    auto gradient = [&](const Vector& lam) {
        Vector y = (p * lam).cwiseProduct(w);
        double nrm = space.norm(p * lam);
        Vector g = Vector::Zero(y.size());
        if (nrm <= 0) return Vector(Vector::Zero(n));
        for (int i = 0; i < y.size(); ++i)
            g(i) = w(i) * (y(i) < 0 ? -1.0 : 1.0) * std::pow(std::abs(y(i)) / nrm, q - 1.0);
        return Vector(p.transpose() * g);
    };
    Vector lam = Vector::Constant(n, 1.0 / n);
    double f = value(lam);
    double step = 1.0 / std::max(1e-300, p.colwise().norm().maxCoeff());
    double lower = 0.0;
    for (int it = 0; it < 2000; ++it) {
        Vector g = gradient(lam);
        lower = std::max(lower, f + (g.minCoeff() - g.dot(lam)));
        if (f - lower <= 1e-12 * std::max(1.0, f)) break;
        while (step > 1e-300) {
            Vector cand = lam - step * g;
            projectToSimplex(cand);
            double fc = value(cand);
            if (fc <= f - 1e-4 * g.dot(lam - cand)) {
                lam = cand;
                f = fc;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (f <= 0) return 0.0;
    }
    return std::max(0.0, lower);
}

} // namespace

double minNormOverHull(const NormedSpace& space, const Matrix& pts)
{
    if (pts.cols() == 0) throw ArgumentError("min norm over an empty set");
    if (pts.cols() == 1) return space.norm(pts.col(0));
    if (space.isPolyhedral()) return polyhedralMinNorm(space.ballFacets(), pts);
    if (space.p() == 2.0) return wolfeMinNorm(space.weights().asDiagonal() * pts);
    return smoothMinNorm(space, pts);
}

LipschitzFunction LipschitzFunction::linear(const NormedSpace& space, const Vector& covector, double offset)
{
    if (covector.size() != space.dim()) throw DimensionError("linear function has wrong dimension");
    LipschitzFunction f(space);
    f.kind_ = LipschitzKind::Linear;
    f.covector_ = covector;
    f.offset_ = offset;
    return f;
}

LipschitzFunction LipschitzFunction::distanceToPoint(const NormedSpace& space, const Vector& z)
{
    if (z.size() != space.dim()) throw DimensionError("center has wrong dimension");
    LipschitzFunction f(space);
    f.kind_ = LipschitzKind::DistanceToPoint;
    f.target_ = Matrix(z);
    return f;
}

LipschitzFunction LipschitzFunction::distanceToPolytope(const NormedSpace& space, const Matrix& vertices)
{
    if (vertices.rows() != space.dim() || vertices.cols() == 0) throw DimensionError("polytope has wrong dimension");
    LipschitzFunction f(space);
    f.kind_ = LipschitzKind::DistanceToPolytope;
    f.target_ = vertices;
    return f;
}

double LipschitzFunction::operator()(const Vector& x) const
{
    switch (kind_) {
    case LipschitzKind::Linear: return covector_.dot(x) + offset_;
    case LipschitzKind::DistanceToPoint: return space_.norm(x - target_.col(0));
    case LipschitzKind::DistanceToPolytope: return minNormOverHull(space_, (-target_).colwise() + x);
    }
    return 0.0;
}

double LipschitzFunction::lipschitz() const
{
    return kind_ == LipschitzKind::Linear ? space_.dualNorm(covector_) : 1.0;
}

double LipschitzFunction::maxOver(const Matrix& pts) const
{
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < pts.cols(); ++i) best = std::max(best, (*this)(pts.col(i)));
    return best;
}

double LipschitzFunction::minOver(const Matrix& pts) const
{
    switch (kind_) {
    case LipschitzKind::Linear: {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < pts.cols(); ++i) best = std::min(best, (*this)(pts.col(i)));
        return best;
    }
    case LipschitzKind::DistanceToPoint: return minNormOverHull(space_, pts.colwise() - target_.col(0));
    case LipschitzKind::DistanceToPolytope: {
        Matrix diffs(pts.rows(), pts.cols() * target_.cols());
        for (int i = 0; i < pts.cols(); ++i)
            for (int j = 0; j < target_.cols(); ++j) diffs.col(i * target_.cols() + j) = pts.col(i) - target_.col(j);
        return minNormOverHull(space_, diffs);
    }
    }
    return 0.0;
}

std::string LipschitzFunction::describe() const
{
    std::ostringstream os;
    switch (kind_) {
    case LipschitzKind::Linear: os << "linear"; break;
    case LipschitzKind::DistanceToPoint: os << "distance_to_point"; break;
    case LipschitzKind::DistanceToPolytope: os << "distance_to_polytope"; break;
    }
    return os.str();
}

} // namespace flatchain
