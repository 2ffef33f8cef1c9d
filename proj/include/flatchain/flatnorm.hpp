#pragma once

/**
 * Flat-norm upper bounds by fillings on a Kuhn triangulation of a box.
 *
 * F(P) is bounded above by min M(Q) + M(P - dQ) over fillings Q supported on
 * the complex.  Chains off the complex are moved onto it by the simplicial map
 * that rounds every point to its nearest grid vertex; the straight-line
 * homotopy gives the reported mass discrepancy.
 */

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flatchain/chains.hpp"

namespace flatchain {

struct Box {
    Vector lo;
    Vector hi;

    static Box unit(int dim) { return Box{Vector::Zero(dim), Vector::Ones(dim)}; }
    bool contains(const Vector& x, double tol) const;
};

/// Column j lists (row, +-1) for the faces of simplex j.
using Incidence = std::vector<std::vector<std::pair<int, int>>>;

class SimplicialComplex {
public:
    /// Throws DimensionError for dim > 4 or ArgumentError for resolution < 1.
    static SimplicialComplex build(const NormedSpace& space, const Box& box, int resolution);

    const NormedSpace& space() const { return space_; }
    const Box& box() const { return box_; }
    int resolution() const { return resolution_; }
    int dim() const { return space_.dim(); }

    /// d x n_vertices.
    const Matrix& vertices() const { return vertices_; }
    int count(int j) const { return static_cast<int>(simplices_.at(static_cast<std::size_t>(j)).size()); }
    /// Vertex indices in increasing order; the orientation is that vertex order.
    const std::vector<int>& simplex(int j, int index) const;
    /// Boundary C_j -> C_{j-1}, for 1 <= j <= d.
    const Incidence& boundaryMatrix(int j) const;
    double simplexMass(int j, int index) const;
    const std::vector<double>& masses(int j) const { return masses_.at(static_cast<std::size_t>(j)); }
    /// Index of the simplex with these (sorted) vertices, or -1.
    int find(const std::vector<int>& sorted_vertices) const;
    /// Vertex nearest to x in the grid, rounding half up per coordinate.
    int roundToVertex(const Vector& x) const;
    /// Largest norm diameter of a top simplex.
    double cellDiameter() const { return cellDiameter_; }
    OrientedPolytope polytope(int j, int index) const;

    /// Halfspaces A x <= b of each top simplex, grouped by grid cube.
    void topSimplexRegion(int index, Matrix& a, Vector& b) const;
    /// Top simplices whose cube meets the given bounding box.
    std::vector<int> topSimplicesNear(const Vector& lo, const Vector& hi) const;

private:
    SimplicialComplex(NormedSpace space, Box box, int resolution)
        : space_(std::move(space)), box_(std::move(box)), resolution_(resolution)
    {
    }

    NormedSpace space_;
    Box box_;
    int resolution_;
    double cellDiameter_ = 0.0;
    Matrix vertices_;
    std::vector<std::vector<std::vector<int>>> simplices_;
    std::vector<Incidence> boundary_;
    std::vector<std::vector<double>> masses_;
    std::vector<std::map<std::vector<int>, int>> lookup_;
    std::vector<std::vector<int>> topCube_;   // cube coordinates of each top simplex
    std::vector<std::vector<int>> topPerm_;   // axis order of each top simplex
};

/// Chain on a complex: one coefficient per j-simplex (residues for Z/m).
struct ComplexChain {
    CoefficientGroup group = CoefficientGroup::reals();
    int k = 0;
    Vector coeffs;

    bool isZero() const { return coeffs.size() == 0 || coeffs.cwiseAbs().maxCoeff() == 0.0; }
};

double complexMass(const SimplicialComplex& complex, const ComplexChain& c);
ComplexChain complexBoundary(const SimplicialComplex& complex, const ComplexChain& c);
ComplexChain complexDifference(const ComplexChain& a, const ComplexChain& b);
PolyChain toPolyChain(const SimplicialComplex& complex, const ComplexChain& c);

struct Embedding {
    ComplexChain chain;
    /// Mass of the homotopy chains H(P) + H(dP); bounds F(P - chain).
    double discrepancy = 0.0;
    bool exact = false;
};

/// Throws ArgumentError for support outside the box.
Embedding embedChain(const PolyChain& chain, const SimplicialComplex& complex);

enum class FlatMode { Real, Integer };

struct FlatNormCertificate {
    ComplexChain filling;
    ComplexChain residual;
    double value = 0.0;
    double filling_mass = 0.0;
    double residual_mass = 0.0;
    FlatMode mode = FlatMode::Real;
    bool optimal = false;
    bool relaxation_integral = false;
    int iterations = 0;
    int nodes = 0;
    std::string solver;
};

struct FlatNormOptions {
    FlatMode mode = FlatMode::Real;
    int max_nodes = 2000;
    /// Z/m enumeration limits.
    int max_modular_simplices = 20;
    int max_modulus = 5;
    long long max_modular_nodes = 20000000;
};

/// Throws SolverError when the linear program stops early; a truncated
/// branch-and-bound or enumeration is reported through `optimal`.
FlatNormCertificate flatNormUpper(const SimplicialComplex& complex, const ComplexChain& p,
                                  const FlatNormOptions& options = {});

/// Exact flat norm of a 0-chain with real or integer coefficients: transport
/// between support points at norm cost plus unit-cost removal. Throws
/// ArgumentError for k > 0 or Z/m coefficients.
double zeroChainFlatNorm(const PolyChain& p);

struct FlatDistance {
    FlatNormCertificate certificate;
    double discrepancy = 0.0;
    /// zeroChainFlatNorm(a - b) when it applies.
    std::optional<double> exact;

    double measured() const { return exact ? *exact : certificate.value; }
};

FlatDistance flatDistance(const PolyChain& a, const PolyChain& b, const SimplicialComplex& complex,
                          const FlatNormOptions& options = {});

struct SweepPoint {
    int resolution = 0;
    double value = 0.0;
    double discrepancy = 0.0;
};

std::vector<SweepPoint> refineSweep(const PolyChain& a, const PolyChain& b, const Box& box,
                                    const std::vector<int>& resolutions, const FlatNormOptions& options = {});

} // namespace flatchain
