#include "flatchain/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>
#include <Eigen/LU>
#include <Eigen/QR>

#include "flatchain/errors.hpp"

namespace flatchain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Calls fn(idx) for every increasing k-subset of {0..n-1}; stops when fn returns false.
template <class Fn>
void forEachSubset(int n, int k, Fn&& fn)
{
    if (k > n || k <= 0) return;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        if (!fn(idx)) return;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

Matrix dedupeColumns(const Matrix& pts, double tol)
{
    std::vector<int> keep;
    for (int i = 0; i < pts.cols(); ++i) {
        bool dup = false;
        for (int j : keep) {
            if ((pts.col(i) - pts.col(j)).norm() <= tol) {
                dup = true;
                break;
            }
        }
        if (!dup) keep.push_back(i);
    }
    Matrix out(pts.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts.col(keep[i]);
    return out;
}

double cross2(const Vector& o, const Vector& a, const Vector& b)
{
    return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

} // namespace

// ---------------------------------------------------------------- PlaneKey

int PlaneKey::rankOf(const Matrix& spanning, double rank_tol)
{
    if (spanning.cols() == 0 || spanning.rows() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(spanning);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rank_tol * s(0)) ++r;
    return r;
}

PlaneKey PlaneKey::fromSpan(const Matrix& spanning, double rank_tol)
{
    const int d = static_cast<int>(spanning.rows());
    PlaneKey key;
    key.projector_ = Matrix::Zero(d, d);
    key.basis_ = Matrix(d, 0);
    if (spanning.cols() == 0) return key;

    Eigen::JacobiSVD<Matrix> svd(spanning, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    int k = 0;
    if (s.size() > 0 && s(0) > 0.0)
        for (int i = 0; i < s.size(); ++i)
            if (s(i) > rank_tol * s(0)) ++k;
    if (k == 0) return key;
    Matrix q = svd.matrixU().leftCols(k);
    key.projector_ = q * q.transpose();

    // Canonical basis: Gram-Schmidt on projected coordinate axes, scanned in order.
    std::vector<Vector> chosen;
    for (double threshold : {0.3, 1e-4}) {
        chosen.clear();
        for (int i = 0; i < d && static_cast<int>(chosen.size()) < k; ++i) {
            Vector r = key.projector_.col(i);
            for (const Vector& b : chosen) r -= b.dot(r) * b;
            for (const Vector& b : chosen) r -= b.dot(r) * b;
            double n = r.norm();
            if (n > threshold) chosen.push_back(r / n);
        }
        if (static_cast<int>(chosen.size()) == k) break;
    }
    if (static_cast<int>(chosen.size()) != k) throw DegenerateError("PlaneKey: cannot build canonical basis");
    key.basis_ = Matrix(d, k);
    for (int j = 0; j < k; ++j) key.basis_.col(j) = chosen[j];
    return key;
}

bool PlaneKey::matches(const PlaneKey& other, double tol) const
{
    if (ambientDim() != other.ambientDim() || dim() != other.dim()) return false;
    if (dim() == 0) return true;
    return (projector_ - other.projector_).cwiseAbs().maxCoeff() <= tol;
}

double PlaneFrame::offFlatDistance(const Vector& x) const
{
    Vector v = x - origin;
    return (v - key.projector() * v).norm();
}

bool PlaneFrame::sameFlat(const PlaneFrame& other, double tol) const
{
    return key.matches(other.key) && offFlatDistance(other.origin) <= tol;
}

std::optional<Halfspace> makeHalfspace(const Vector& a, double b)
{
    double n = a.norm();
    if (!(n > 1e-300)) return std::nullopt;
    return Halfspace{a / n, b / n};
}

double simplexVolume(const Matrix& s)
{
    const int k = static_cast<int>(s.cols()) - 1;
    if (k <= 0) return 1.0;
    Matrix m = s.rightCols(k).colwise() - s.col(0);
    double g = (m.transpose() * m).determinant();
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return std::sqrt(std::max(0.0, g)) / f;
}

Matrix complementBasis(const Vector& unit)
{
    const int n = static_cast<int>(unit.size());
    if (n <= 1) return Matrix(n, 0);
    Eigen::HouseholderQR<Matrix> qr{Matrix(unit)};
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - 1);
}

/// Points of the slice {u.x = level} of a simplex given by its columns.
Matrix simplexSlice(const Matrix& s, const Vector& u, double level)
{
    const int n = static_cast<int>(s.cols());
    Vector f = u.transpose() * s;
    std::vector<Vector> pts;
    for (int i = 0; i < n; ++i)
        if (f(i) == level) pts.push_back(s.col(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double a = f(i) - level, b = f(j) - level;
            if ((a < 0 && b > 0) || (a > 0 && b < 0)) {
                double t = a / (a - b);
                pts.push_back(s.col(i) + t * (s.col(j) - s.col(i)));
            }
        }
    Matrix out(s.rows(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts[i];
    return out;
}

// ---------------------------------------------------------------- ConvexCell

bool ConvexCell::boxesOverlap(const ConvexCell& other, double tol) const
{
    for (int i = 0; i < dim_; ++i)
        if (lo_(i) > other.hi_(i) + tol || other.lo_(i) > hi_(i) + tol) return false;
    return true;
}

bool ConvexCell::contains(const Vector& x, double tol) const
{
    for (const Halfspace& h : facets_)
        if (h.eval(x) > tol) return false;
    return true;
}

Matrix ConvexCell::facetBasis(int i) const { return complementBasis(facets_[i].normal); }

std::optional<ConvexCell> ConvexCell::facetCell(int i, double tol) const
{
    const auto& fv = facetVerts_[i];
    Matrix pts(dim_, static_cast<Eigen::Index>(fv.size()));
    for (std::size_t j = 0; j < fv.size(); ++j) pts.col(static_cast<Eigen::Index>(j)) = verts_.col(fv[j]);
    Matrix local = facetBasis(i).transpose() * pts;
    return fromPoints(local, tol);
}

std::optional<ConvexCell> ConvexCell::fromPoints(const Matrix& raw, double tol)
{
    const int k = static_cast<int>(raw.rows());
    ConvexCell c;
    c.dim_ = k;
    if (k == 0) {
        c.verts_ = Matrix(0, 1);
        c.lo_ = Vector(0);
        c.hi_ = Vector(0);
        c.volume_ = 1.0;
        return c;
    }
    if (raw.cols() == 0) return std::nullopt;
    Matrix pts = dedupeColumns(raw, tol);
    const int n = static_cast<int>(pts.cols());
    if (n < k + 1) return std::nullopt;

    if (k == 1) {
        double lo = pts.row(0).minCoeff(), hi = pts.row(0).maxCoeff();
        c.verts_ = Matrix(1, 2);
        c.verts_ << lo, hi;
        c.facets_ = {Halfspace{Vector::Constant(1, -1.0), -lo}, Halfspace{Vector::Constant(1, 1.0), hi}};
        c.facetVerts_ = {{0}, {1}};
    } else if (k == 2) {
        std::vector<Vector> p;
        for (int i = 0; i < n; ++i) p.push_back(pts.col(i));
        std::sort(p.begin(), p.end(), [](const Vector& a, const Vector& b) {
            return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
        });
        std::vector<Vector> hull(2 * p.size());
        int m = 0;
        auto turnsLeft = [&](const Vector& o, const Vector& a, const Vector& b) {
            return cross2(o, a, b) > tol * (b - o).norm();
        };
        for (std::size_t i = 0; i < p.size(); ++i) {
            while (m >= 2 && !turnsLeft(hull[m - 2], hull[m - 1], p[i])) --m;
            hull[m++] = p[i];
        }
        for (int i = static_cast<int>(p.size()) - 2, t = m + 1; i >= 0; --i) {
            while (m >= t && !turnsLeft(hull[m - 2], hull[m - 1], p[i])) --m;
            hull[m++] = p[i];
        }
        --m;
        if (m < 3) return std::nullopt;
        c.verts_ = Matrix(2, m);
        for (int i = 0; i < m; ++i) c.verts_.col(i) = hull[i];
        for (int i = 0; i < m; ++i) {
            Vector a = hull[i], b = hull[(i + 1) % m];
            Vector nrm(2);
            nrm << b(1) - a(1), a(0) - b(0);
            nrm.normalize();
            c.facets_.push_back(Halfspace{nrm, nrm.dot(a)});
            c.facetVerts_.push_back({i, (i + 1) % m});
        }
    } else {
        Vector mean = pts.rowwise().mean();
        Eigen::JacobiSVD<Matrix> full((pts.colwise() - mean));
        if (full.singularValues()(k - 1) <= tol) return std::nullopt;

        std::vector<Halfspace> facets;
        forEachSubset(n, k, [&](const std::vector<int>& idx) {
            for (const Halfspace& h : facets) {
                bool all = true;
                for (int j : idx)
                    if (std::abs(h.eval(pts.col(j))) > tol) {
                        all = false;
                        break;
                    }
                if (all) return true;
            }
            Matrix a(k - 1, k);
            for (int j = 1; j < k; ++j) a.row(j - 1) = (pts.col(idx[j]) - pts.col(idx[0])).transpose();
            Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
            if (svd.singularValues()(k - 2) <= tol) return true;
            Vector nrm = svd.matrixV().col(k - 1).normalized();
            Vector vals = nrm.transpose() * pts;
            double off = nrm.dot(pts.col(idx[0]));
            double hi = vals.maxCoeff() - off, lo = vals.minCoeff() - off;
            if (hi <= tol) {
                facets.push_back(Halfspace{nrm, vals.maxCoeff()});
            } else if (lo >= -tol) {
                facets.push_back(Halfspace{-nrm, -vals.minCoeff()});
            }
            return true;
        });
        if (static_cast<int>(facets.size()) < k + 1) return std::nullopt;

        std::vector<int> vidx;
        for (int i = 0; i < n; ++i) {
            Matrix normals(k, 0);
            std::vector<Vector> on;
            for (const Halfspace& h : facets)
                if (std::abs(h.eval(pts.col(i))) <= tol) on.push_back(h.normal);
            if (static_cast<int>(on.size()) < k) continue;
            Matrix nm(k, static_cast<Eigen::Index>(on.size()));
            for (std::size_t j = 0; j < on.size(); ++j) nm.col(static_cast<Eigen::Index>(j)) = on[j];
            if (PlaneKey::rankOf(nm, 1e-6) == k) vidx.push_back(i);
        }
        c.verts_ = Matrix(k, static_cast<Eigen::Index>(vidx.size()));
        for (std::size_t j = 0; j < vidx.size(); ++j) c.verts_.col(static_cast<Eigen::Index>(j)) = pts.col(vidx[j]);
        for (const Halfspace& h : facets) {
            std::vector<int> fv;
            for (int j = 0; j < c.verts_.cols(); ++j)
                if (std::abs(h.eval(c.verts_.col(j))) <= tol) fv.push_back(j);
            if (static_cast<int>(fv.size()) < k) continue;
            c.facets_.push_back(h);
            c.facetVerts_.push_back(std::move(fv));
        }
    }
    if (!c.finish(tol)) return std::nullopt;
    return c;
}

bool ConvexCell::finish(double tol)
{
    lo_ = verts_.rowwise().minCoeff();
    hi_ = verts_.rowwise().maxCoeff();
    for (const Halfspace& h : facets_) {
        double width = 0.0;
        for (int j = 0; j < verts_.cols(); ++j) width = std::max(width, -h.eval(verts_.col(j)));
        if (width <= tol) return false;
    }
    if (dim_ == 1) {
        volume_ = hi_(0) - lo_(0);
    } else if (dim_ == 2) {
        double a = 0.0;
        const int m = static_cast<int>(verts_.cols());
        for (int i = 0; i < m; ++i) {
            int j = (i + 1) % m;
            a += verts_(0, i) * verts_(1, j) - verts_(0, j) * verts_(1, i);
        }
        volume_ = 0.5 * std::abs(a);
    } else {
        Vector c = centroid();
        volume_ = 0.0;
        for (int i = 0; i < static_cast<int>(facets_.size()); ++i) {
            auto fc = facetCell(i, tol);
            if (!fc) continue;
            volume_ += -facets_[i].eval(c) * fc->volume() / dim_;
        }
    }
    return volume_ > 0.0;
}

std::optional<ConvexCell> ConvexCell::fromHalfspaces(const std::vector<Halfspace>& hs, int dim, double tol)
{
    if (dim == 1) {
        double lo = -kInf, hi = kInf;
        for (const Halfspace& h : hs) {
            double a = h.normal(0);
            if (a > 0) hi = std::min(hi, h.offset / a);
            else if (a < 0) lo = std::max(lo, h.offset / a);
            else if (h.offset < -tol) return std::nullopt;
        }
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw DegenerateError("unbounded halfspace intersection");
        if (hi - lo <= tol) return std::nullopt;
        Matrix pts(1, 2);
        pts << lo, hi;
        return fromPoints(pts, tol);
    }
    const int m = static_cast<int>(hs.size());
    std::vector<Vector> pts;
    forEachSubset(m, dim, [&](const std::vector<int>& idx) {
        Matrix a(dim, dim);
        Vector b(dim);
        for (int j = 0; j < dim; ++j) {
            a.row(j) = hs[idx[j]].normal.transpose();
            b(j) = hs[idx[j]].offset;
        }
        Eigen::FullPivLU<Matrix> lu(a);
        lu.setThreshold(1e-10);
        if (lu.rank() < dim) return true;
        Vector x = lu.solve(b);
        for (const Halfspace& h : hs)
            if (h.eval(x) > tol) return true;
        pts.push_back(x);
        return true;
    });
    if (static_cast<int>(pts.size()) < dim + 1) return std::nullopt;
    Matrix p(dim, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) p.col(static_cast<Eigen::Index>(j)) = pts[j];
    return fromPoints(p, tol);
}

std::optional<ConvexCell> ConvexCell::clip(const Halfspace& h, double tol) const
{
    Vector ev(verts_.cols());
    for (int j = 0; j < verts_.cols(); ++j) ev(j) = h.eval(verts_.col(j));
    if (ev.maxCoeff() <= tol) return *this;
    if (ev.minCoeff() >= -tol) return std::nullopt;
    if (dim_ == 2) {
        std::vector<Vector> out;
        const int m = static_cast<int>(verts_.cols());
        for (int i = 0; i < m; ++i) {
            int j = (i + 1) % m;
            double a = ev(i), b = ev(j);
            if (a <= 0) out.push_back(verts_.col(i));
            if ((a < 0 && b > 0) || (a > 0 && b < 0)) {
                double t = a / (a - b);
                out.push_back(verts_.col(i) + t * (verts_.col(j) - verts_.col(i)));
            }
        }
        if (out.size() < 3) return std::nullopt;
        Matrix p(2, static_cast<Eigen::Index>(out.size()));
        for (std::size_t j = 0; j < out.size(); ++j) p.col(static_cast<Eigen::Index>(j)) = out[j];
        return fromPoints(p, tol);
    }
    std::vector<Halfspace> hs = facets_;
    hs.push_back(h);
    return fromHalfspaces(hs, dim_, tol);
}

std::optional<ConvexCell> ConvexCell::intersect(const ConvexCell& other, double tol) const
{
    if (dim_ != other.dim_) throw DimensionError("ConvexCell::intersect: dimension mismatch");
    if (!boxesOverlap(other, tol)) return std::nullopt;
    std::vector<Halfspace> cutting;
    for (const Halfspace& h : other.facets_) {
        double mx = -kInf, mn = kInf;
        for (int j = 0; j < verts_.cols(); ++j) {
            double e = h.eval(verts_.col(j));
            mx = std::max(mx, e);
            mn = std::min(mn, e);
        }
        if (mn >= -tol) return std::nullopt;
        if (mx > tol) cutting.push_back(h);
    }
    if (cutting.empty()) return *this;
    if (dim_ <= 2 || cutting.size() == 1) {
        std::optional<ConvexCell> cur = *this;
        for (const Halfspace& h : cutting) {
            cur = cur->clip(h, tol);
            if (!cur) return std::nullopt;
        }
        return cur;
    }
    std::vector<Halfspace> hs = facets_;
    hs.insert(hs.end(), cutting.begin(), cutting.end());
    return fromHalfspaces(hs, dim_, tol);
}

std::vector<ConvexCell> ConvexCell::subtract(const ConvexCell& other, double tol) const
{
    if (!intersect(other, tol)) return {*this};
    std::vector<ConvexCell> pieces;
    std::optional<ConvexCell> cur = *this;
    for (const Halfspace& h : other.facets_) {
        auto outside = cur->clip(h.flipped(), tol);
        if (outside) pieces.push_back(*outside);
        cur = cur->clip(h, tol);
        if (!cur) break;
    }
    return pieces;
}

std::vector<Matrix> ConvexCell::triangulate(double tol) const
{
    std::vector<Matrix> out;
    if (dim_ == 0) {
        out.push_back(Matrix(0, 1));
        return out;
    }
    if (dim_ == 1) {
        out.push_back(verts_);
        return out;
    }
    if (dim_ == 2) {
        for (int i = 1; i + 1 < verts_.cols(); ++i) {
            Matrix s(2, 3);
            s << verts_.col(0), verts_.col(i), verts_.col(i + 1);
            out.push_back(s);
        }
        return out;
    }
    Vector apex = verts_.col(0);
    for (int i = 0; i < static_cast<int>(facets_.size()); ++i) {
        if (facets_[i].eval(apex) >= -tol) continue;
        auto fc = facetCell(i, tol);
        if (!fc) continue;
        Matrix t = facetBasis(i);
        Vector base = facets_[i].offset * facets_[i].normal;
        for (const Matrix& s : fc->triangulate(tol)) {
            Matrix full(dim_, dim_ + 1);
            full.col(0) = apex;
            full.rightCols(dim_) = (t * s).colwise() + base;
            out.push_back(full);
        }
    }
    return out;
}

} // namespace flatchain
