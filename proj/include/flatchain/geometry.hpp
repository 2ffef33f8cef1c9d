#pragma once

/**
 * Convex geometry in local plane coordinates.
 *
 * A k-dimensional polytope in d-space is handled through a PlaneFrame (an
 * origin plus an orthonormal basis of its direction space) and a ConvexCell
 * living in R^k.  ConvexCell keeps both descriptions: the extreme points and
 * the facet halfspaces n.x <= b with Euclidean-unit normals.  All predicates
 * take an absolute tolerance `tol` measured in local coordinates.
 */

#include <optional>
#include <vector>

#include "flatchain/foundation.hpp"

namespace flatchain {

/// Direction subspace: orthogonal projector plus a canonical orthonormal basis.
class PlaneKey {
public:
    PlaneKey() = default;

    /// Subspace spanned by the columns of `spanning`; `rank_tol` is relative.
    static PlaneKey fromSpan(const Matrix& spanning, double rank_tol = 1e-9);
    /// Rank of a set of spanning vectors at the same relative tolerance.
    static int rankOf(const Matrix& spanning, double rank_tol = 1e-9);

    int ambientDim() const { return static_cast<int>(projector_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    /// d x k orthonormal basis; its column order defines the positive orientation.
    const Matrix& basis() const { return basis_; }
    const Matrix& projector() const { return projector_; }

    bool matches(const PlaneKey& other, double tol = 1e-9) const;

private:
    Matrix basis_;
    Matrix projector_;
};

/// Affine flat: origin + span(key.basis()).
struct PlaneFrame {
    Vector origin;
    PlaneKey key;

    Vector toLocal(const Vector& x) const { return key.basis().transpose() * (x - origin); }
    Matrix toLocal(const Matrix& pts) const
    {
        return key.basis().transpose() * (pts.colwise() - origin);
    }
    Vector toAmbient(const Vector& t) const { return origin + key.basis() * t; }
    Matrix toAmbient(const Matrix& t) const { return (key.basis() * t).colwise() + origin; }

    /// Same direction space and the origins differ by a vector in it.
    bool sameFlat(const PlaneFrame& other, double tol) const;
    /// Distance of a point from the flat (Euclidean).
    double offFlatDistance(const Vector& x) const;
};

struct Halfspace {
    Vector normal;  ///< Euclidean unit normal
    double offset = 0.0;

    double eval(const Vector& x) const { return normal.dot(x) - offset; }
    Halfspace flipped() const { return Halfspace{-normal, -offset}; }
};

/// Build a halfspace a.x <= b, normalizing a; returns nullopt for a ~ 0.
std::optional<Halfspace> makeHalfspace(const Vector& a, double b);

class ConvexCell {
public:
    /// Convex hull of the columns of `pts` (k x n).  nullopt when the hull is
    /// thinner than `tol` in some direction.
    static std::optional<ConvexCell> fromPoints(const Matrix& pts, double tol);
    /// Bounded intersection of halfspaces in R^dim.
    static std::optional<ConvexCell> fromHalfspaces(const std::vector<Halfspace>& hs, int dim, double tol);

    int dim() const { return dim_; }
    const Matrix& vertices() const { return verts_; }
    int numVertices() const { return static_cast<int>(verts_.cols()); }
    const std::vector<Halfspace>& facets() const { return facets_; }
    /// Indices into vertices() of the vertices lying on facet `i`.
    const std::vector<int>& facetVertices(int i) const { return facetVerts_[i]; }
    double volume() const { return volume_; }
    Vector centroid() const { return verts_.rowwise().mean(); }
    const Vector& lower() const { return lo_; }
    const Vector& upper() const { return hi_; }

    /// Part with h.eval(x) <= 0.
    std::optional<ConvexCell> clip(const Halfspace& h, double tol) const;
    std::optional<ConvexCell> intersect(const ConvexCell& other, double tol) const;
    /// Convex pieces covering this \ other (disjoint interiors).
    std::vector<ConvexCell> subtract(const ConvexCell& other, double tol) const;
    bool boxesOverlap(const ConvexCell& other, double tol) const;
    bool contains(const Vector& x, double tol) const;

    /// Facet `i` as a (dim-1)-cell in the coordinates given by facetBasis(i).
    std::optional<ConvexCell> facetCell(int i, double tol) const;
    /// dim x (dim-1) orthonormal basis of facet i's hyperplane.
    Matrix facetBasis(int i) const;

    /// Simplices (each dim x (dim+1)) whose union is the cell.
    std::vector<Matrix> triangulate(double tol) const;

private:
    ConvexCell() = default;
    bool finish(double tol);

    int dim_ = 0;
    Matrix verts_;
    std::vector<Halfspace> facets_;
    std::vector<std::vector<int>> facetVerts_;
    double volume_ = 0.0;
    Vector lo_, hi_;
};

/// Euclidean k-volume of the simplex spanned by the columns of `s` (d x (k+1)).
double simplexVolume(const Matrix& s);

/// Points where the edges of a simplex (columns of s) cross {u.x = level},
/// plus vertices lying exactly on it.
Matrix simplexSlice(const Matrix& s, const Vector& u, double level);

/// Orthonormal complement basis of a unit vector (n x (n-1)).
Matrix complementBasis(const Vector& unit);

} // namespace flatchain
