#include "flatchain/chain_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flatchain/errors.hpp"

namespace flatchain {

using nlohmann::json;

std::string formatDouble(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parseNumber(const json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) throw FormatError("not a number: '" + s + "'");
        return v;
    }
    throw FormatError("expected a number or numeric string");
}

namespace {

json vectorToJson(const Vector& v)
{
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(formatDouble(v(i)));
    return a;
}

Vector vectorFromJson(const json& j, int dim)
{
    if (!j.is_array()) throw FormatError("expected a coordinate array");
    if (dim >= 0 && static_cast<int>(j.size()) != dim) throw FormatError("coordinate array has wrong length");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parseNumber(j[i]);
    return v;
}

Matrix columnsFromJson(const json& j, int dim)
{
    if (!j.is_array()) throw FormatError("expected an array of vectors");
    Matrix m(dim, static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = vectorFromJson(j[i], dim);
    return m;
}

json columnsToJson(const Matrix& m)
{
    json a = json::array();
    for (int i = 0; i < m.cols(); ++i) a.push_back(vectorToJson(m.col(i)));
    return a;
}

json coeffToJson(const GroupElement& g)
{
    if (g.kind() == GroupKind::Reals) return formatDouble(g.realValue());
    return g.integerValue();
}

} // namespace

json spaceToJson(const NormedSpace& space)
{
    json norm;
    switch (space.kind()) {
    case NormKind::P:
        norm = {{"kind", "p"}, {"p", formatDouble(space.p())}};
        break;
    case NormKind::WeightedP:
        norm = {{"kind", "weighted_p"}, {"p", formatDouble(space.p())}, {"weights", vectorToJson(space.weights())}};
        break;
    case NormKind::Polytope: {
        json rows = json::array();
        for (int i = 0; i < space.facets().rows(); ++i) rows.push_back(vectorToJson(space.facets().row(i).transpose()));
        norm = {{"kind", "polytope"}, {"facets", rows}};
        break;
    }
    }
    return json{{"dim", space.dim()}, {"norm", norm}};
}

NormedSpace spaceFromJson(const json& j)
{
    if (!j.is_object() || !j.contains("dim") || !j.contains("norm")) throw FormatError("space needs 'dim' and 'norm'");
    const int dim = j.at("dim").get<int>();
    const json& n = j.at("norm");
    const std::string kind = n.at("kind").get<std::string>();
    if (kind == "p") return NormedSpace::pNorm(dim, parseNumber(n.at("p")));
    if (kind == "weighted_p") {
        Vector w = vectorFromJson(n.at("weights"), dim);
        return NormedSpace::weightedPNorm(w, parseNumber(n.at("p")));
    }
    if (kind == "polytope") {
        const json& rows = n.at("facets");
        Matrix f(static_cast<Eigen::Index>(rows.size()), dim);
        for (std::size_t i = 0; i < rows.size(); ++i)
            f.row(static_cast<Eigen::Index>(i)) = vectorFromJson(rows[i], dim).transpose();
        return NormedSpace::polytopeNorm(f);
    }
    throw FormatError("unknown norm kind '" + kind + "'");
}

json groupToJson(const CoefficientGroup& group)
{
    switch (group.kind()) {
    case GroupKind::Integers: return json{{"kind", "Z"}};
    case GroupKind::IntegersModM: return json{{"kind", "Zm"}, {"m", group.modulus()}};
    case GroupKind::Reals: return json{{"kind", "R"}};
    }
    return json();
}

CoefficientGroup groupFromJson(const json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "Z") return CoefficientGroup::integers();
    if (kind == "Zm") return CoefficientGroup::integersMod(j.at("m").get<std::int64_t>());
    if (kind == "R") return CoefficientGroup::reals();
    throw FormatError("unknown group kind '" + kind + "'");
}

json chainToJson(const PolyChain& chain)
{
    json summands = json::array();
    for (const auto& s : chain.summands()) {
        summands.push_back(json{{"coeff", coeffToJson(s.coeff)},
                                {"vertices", columnsToJson(s.poly.vertices())},
                                {"orientation_basis", columnsToJson(s.poly.orientationBasis())}});
    }
    return json{{"space", spaceToJson(chain.space())},
                {"group", groupToJson(chain.group())},
                {"k", chain.k()},
                {"summands", summands}};
}

PolyChain chainFromJson(const json& j)
{
    try {
        NormedSpace space = spaceFromJson(j.at("space"));
        CoefficientGroup group = groupFromJson(j.at("group"));
        const int k = j.at("k").get<int>();
        PolyChain chain(space, group, k);
        const json& arr = j.at("summands");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "summand " + std::to_string(i) + ": ";
            try {
                const json& s = arr[i];
                GroupElement g = group.element(parseNumber(s.at("coeff")));
                Matrix verts = columnsFromJson(s.at("vertices"), space.dim());
                Matrix basis = s.contains("orientation_basis") ? columnsFromJson(s.at("orientation_basis"), space.dim())
                                                               : Matrix(space.dim(), 0);
                if (basis.cols() != k) throw FormatError("orientation basis must have k vectors");
                auto p = OrientedPolytope::make(verts, basis);
                if (p) chain.add(g, *p);
            } catch (const FormatError& e) {
                throw FormatError(where + e.what());
            } catch (const Error& e) {
                throw FormatError(where + e.what());
            } catch (const json::exception& e) {
                throw FormatError(where + e.what());
            }
        }
        return chain;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed chain: ") + e.what());
    }
}

PolyChain readChain(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("'" + path + "': " + e.what());
    }
    return chainFromJson(j);
}

void writeChain(const PolyChain& chain, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << chainToJson(chain).dump(2) << "\n";
}

} // namespace flatchain
