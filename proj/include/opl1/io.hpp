#ifndef OPL1_IO_HPP_
#define OPL1_IO_HPP_

//
// JSON forms:
//   matrix      {"re": [[...]], "im": [[...]]}       "im" may be omitted for real matrices
//   operator    {"dims": [...], "blocks": [matrix, ...]}
//   functional  {"dims": [...], "k_blocks": [matrix, ...]}
//   sparse      {"<index>": matrix | number, ...}      numbers are 1x1 blocks
//   rule        {"kind": "linear", "params": {"slope": s}}
//               {"kind": "seeded_psd", "params": {"seed": s, "dim": d}}
//

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "anorm.hpp"
#include "diagonal.hpp"
#include "error.hpp"

namespace opl1::io
{

using json = nlohmann::json;

namespace detail
{

[[noreturn]] inline void fail(const std::string& what) { throw invalid_input("json: " + what); }

inline const json& field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline double number(const json& j, const char* what)
{
    if (!j.is_number()) fail(std::string(what) + " must be a number");
    return j.get<double>();
}

}  // namespace detail

inline json to_json(const Matrix& m)
{
    json re = json::array(), im = json::array();
    bool complex = false;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
    {
        json r = json::array(), c = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
        {
            r.push_back(m(i, j).real());
            c.push_back(m(i, j).imag());
            complex = complex || m(i, j).imag() != 0.0;
        }
        re.push_back(std::move(r));
        im.push_back(std::move(c));
    }
    json out{{"re", std::move(re)}};
    if (complex) out["im"] = std::move(im);
    return out;
}

inline Matrix matrix_from_json(const json& j)
{
    const json& re = detail::field(j, "re");
    if (!re.is_array() || re.empty()) detail::fail("'re' must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(re.size());
    if (!re[0].is_array() || re[0].empty()) detail::fail("'re' rows must be non-empty arrays");
    const auto cols = static_cast<Eigen::Index>(re[0].size());
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    if (im && (!im->is_array() || static_cast<Eigen::Index>(im->size()) != rows)) detail::fail("'im' shape mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        const json& r = re[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) detail::fail("ragged matrix");
        const json* c = im ? &(*im)[static_cast<std::size_t>(i)] : nullptr;
        if (c && (!c->is_array() || static_cast<Eigen::Index>(c->size()) != cols)) detail::fail("'im' shape mismatch");
        for (Eigen::Index k = 0; k < cols; ++k)
        {
            const auto kk = static_cast<std::size_t>(k);
            m(i, k) = Complex(detail::number(r[kk], "matrix entry"), c ? detail::number((*c)[kk], "matrix entry") : 0.0);
        }
    }
    return m;
}

inline json to_json(const BlockStructure& s) { return json(s.dims()); }

inline BlockStructure structure_from_json(const json& j)
{
    if (!j.is_array()) detail::fail("'dims' must be an array");
    std::vector<int> dims;
    for (const auto& d : j)
    {
        if (!d.is_number_integer()) detail::fail("'dims' entries must be integers");
        dims.push_back(d.get<int>());
    }
    return BlockStructure(dims);
}

namespace detail
{

inline json blocks_to_json(const std::vector<Matrix>& blocks)
{
    json out = json::array();
    for (const auto& m : blocks) out.push_back(to_json(m));
    return out;
}

inline std::vector<Matrix> blocks_from_json(const json& j)
{
    if (!j.is_array()) fail("blocks must be an array");
    std::vector<Matrix> out;
    for (const auto& m : j) out.push_back(matrix_from_json(m));
    return out;
}

}  // namespace detail

inline json to_json(const Operator& x) { return {{"dims", to_json(x.structure())}, {"blocks", detail::blocks_to_json(x.blocks())}}; }

inline Operator operator_from_json(const json& j)
{
    return Operator(structure_from_json(detail::field(j, "dims")), detail::blocks_from_json(detail::field(j, "blocks")));
}

inline json to_json(const Functional& f)
{
    return {{"dims", to_json(f.structure())}, {"k_blocks", detail::blocks_to_json(f.k_blocks())}};
}

inline Functional functional_from_json(const json& j)
{
    return Functional(structure_from_json(detail::field(j, "dims")), detail::blocks_from_json(detail::field(j, "k_blocks")));
}

inline json to_json(const NormCertificate& c)
{
    json out{{"value", c.value},
             {"witness_plus", to_json(c.witness_plus)},
             {"witness_minus", to_json(c.witness_minus)},
             {"audit_floor", nullptr},
             {"trials", c.trials},
             {"seed", c.seed}};
    if (c.audit_floor) out["audit_floor"] = *c.audit_floor;
    return out;
}

inline NormCertificate certificate_from_json(const json& j)
{
    const json& floor = detail::field(j, "audit_floor");
    return {detail::number(detail::field(j, "value"), "value"),
            functional_from_json(detail::field(j, "witness_plus")),
            functional_from_json(detail::field(j, "witness_minus")),
            floor.is_null() ? std::nullopt : std::optional<double>(detail::number(floor, "audit_floor")),
            detail::field(j, "trials").get<int>(),
            detail::field(j, "seed").get<std::uint64_t>()};
}

inline json to_json(const SparseFunctional& f)
{
    json out = json::object();
    for (const auto& [n, k] : f.blocks())
    {
        if (k.rows() == 1 && k(0, 0).imag() == 0.0)
            out[std::to_string(n)] = k(0, 0).real();
        else
            out[std::to_string(n)] = to_json(k);
    }
    return out;
}

inline SparseFunctional sparse_from_json(const json& j)
{
    if (!j.is_object()) detail::fail("support must be an object");
    SparseFunctional::Map m;
    for (const auto& [key, v] : j.items())
    {
        std::size_t n = 0;
        std::size_t used = 0;
        try
        {
            n = std::stoul(key, &used);
        }
        catch (const std::exception&)
        {
            detail::fail("support key '" + key + "' is not an index");
        }
        if (used != key.size()) detail::fail("support key '" + key + "' is not an index");
        m.emplace(n, v.is_number() ? Matrix::Constant(1, 1, Complex(v.get<double>(), 0.0)) : matrix_from_json(v));
    }
    return SparseFunctional(std::move(m));
}

inline json rule_to_json(const UnboundedBlockOperator& a)
{
    if (a.kind() == "linear") return {{"kind", "linear"}, {"params", {{"slope", a.slope().value()}}}};
    if (a.kind() == "seeded_psd")
        return {{"kind", "seeded_psd"}, {"params", {{"seed", a.seed().value()}, {"dim", a.rule_dim().value()}}}};
    throw invalid_input("rule_to_json: rule '" + a.kind() + "' has no JSON form");
}

inline UnboundedBlockOperator rule_from_json(const json& j)
{
    const std::string kind = detail::field(j, "kind").get<std::string>();
    const json params = j.value("params", json::object());
    if (kind == "linear") return UnboundedBlockOperator::linear(params.value("slope", 1.0));
    if (kind == "seeded_psd")
        return UnboundedBlockOperator::seeded_psd(detail::field(params, "seed").get<std::uint64_t>(),
                                                  detail::field(params, "dim").get<int>());
    detail::fail("unknown rule kind '" + kind + "'");
}

// files; read and write failures raise io_error, malformed JSON raises invalid_input

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_error("read failed on '" + path + "'");
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw io_error("write failed on '" + path + "'");
}

inline json parse(const std::string& text, const std::string& origin = "input")
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw invalid_input(origin + ": " + e.what());
    }
}

inline json read_json(const std::string& path) { return parse(read_text(path), path); }

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace opl1::io

#endif
