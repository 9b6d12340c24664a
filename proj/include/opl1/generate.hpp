#ifndef OPL1_GENERATE_HPP_
#define OPL1_GENERATE_HPP_

//
// Seeded instances. A profile is "<kind>-<dims>":
//
//   kind   inj       a positive definite, eigenvalues scale * [1e-3, 1] log-uniform
//          noninj    a with planted zero eigenvalues in at least one block
//          central   a block-scalar, scalars in [0.1, 10]
//   dims   NxN | N   one block of size N
//          (d1,...)  blocks of the given sizes
//          randK     1 to 3 blocks of random size <= K, drawn per instance
//
// plus the diagonal model profiles "diag-linear" and "diag-seeded[-d]".
//
// Instance `index` of a run with `seed` draws from Rng::stream(seed, index) only.
//

#include <bit>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "diagonal.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace opl1
{

namespace gen
{

inline Matrix gaussian(int rows, int cols, Rng& rng)
{
    Matrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
    return g;
}

inline Matrix hermitian(int d, Rng& rng)
{
    const Matrix g = gaussian(d, d, rng);
    return (g + g.adjoint()) * 0.5;
}

inline Matrix unitary(int d, Rng& rng)
{
    return Eigen::HouseholderQR<Matrix>(gaussian(d, d, rng)).householderQ();
}

// U diag(ev) U*
inline Matrix with_spectrum(const RealVector& ev, Rng& rng)
{
    const Matrix u = unitary(static_cast<int>(ev.size()), rng);
    return detail::hermitian_part(u * ev.cast<Complex>().asDiagonal() * u.adjoint());
}

inline Matrix gram(int d, int rank, Rng& rng)
{
    const Matrix g = gaussian(d, rank, rng);
    return g * g.adjoint();
}

// eigenprojection of a random Hermitian onto its positive spectrum
inline Matrix projection(int d, Rng& rng)
{
    const auto e = detail::jacobi_eig(hermitian(d, rng));
    return detail::spectral_map(e, [](double t) { return t > 0.0 ? 1.0 : 0.0; });
}

}  // namespace gen

enum class ProfileKind
{
    inj,
    noninj,
    central,
    diag_linear,
    diag_seeded
};

struct Profile
{
    std::string text;
    ProfileKind kind;
    std::vector<int> dims;  // fixed block sizes; empty for random or diagonal profiles
    int max_dim = 0;        // randK
    int rule_dim = 2;       // diag-seeded block size

    bool diagonal() const { return kind == ProfileKind::diag_linear || kind == ProfileKind::diag_seeded; }
};

namespace detail
{

inline int parse_positive(const std::string& s, const std::string& profile)
{
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 6)
        throw invalid_input("profile '" + profile + "': bad size '" + s + "'");
    const int v = std::stoi(s);
    if (v < 1) throw invalid_input("profile '" + profile + "': sizes must be >= 1");
    return v;
}

}  // namespace detail

inline Profile parse_profile(const std::string& text)
{
    if (text == "diag-linear") return {text, ProfileKind::diag_linear, {}, 0, 1};
    if (text.rfind("diag-seeded", 0) == 0)
    {
        Profile p{text, ProfileKind::diag_seeded, {}, 0, 2};
        const std::string rest = text.substr(11);
        if (!rest.empty())
        {
            if (rest[0] != '-') throw invalid_input("profile '" + text + "': expected diag-seeded-<d>");
            p.rule_dim = detail::parse_positive(rest.substr(1), text);
        }
        return p;
    }

    const auto dash = text.find('-');
    if (dash == std::string::npos) throw invalid_input("profile '" + text + "': expected <kind>-<dims>");
    const std::string kind = text.substr(0, dash), dims = text.substr(dash + 1);
    Profile p{text, ProfileKind::inj, {}, 0, 2};
    if (kind == "inj")
        p.kind = ProfileKind::inj;
    else if (kind == "noninj")
        p.kind = ProfileKind::noninj;
    else if (kind == "central")
        p.kind = ProfileKind::central;
    else
        throw invalid_input("profile '" + text + "': unknown kind '" + kind + "'");

    if (dims.rfind("rand", 0) == 0)
        p.max_dim = detail::parse_positive(dims.substr(4), text);
    else if (!dims.empty() && dims.front() == '(' && dims.back() == ')')
    {
        std::string body = dims.substr(1, dims.size() - 2);
        std::size_t start = 0;
        while (true)
        {
            const auto comma = body.find(',', start);
            p.dims.push_back(detail::parse_positive(body.substr(start, comma - start), text));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    else if (const auto x = dims.find('x'); x != std::string::npos)
    {
        const int r = detail::parse_positive(dims.substr(0, x), text);
        const int c = detail::parse_positive(dims.substr(x + 1), text);
        if (r != c) throw invalid_input("profile '" + text + "': blocks are square");
        p.dims = {r};
    }
    else
        p.dims = {detail::parse_positive(dims, text)};
    return p;
}

struct Instance
{
    std::string profile;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::optional<Operator> a;
    std::optional<Functional> phi;
    std::optional<UnboundedBlockOperator> rule;
    std::optional<SparseFunctional> sparse;
    std::string digest;
};

namespace detail
{

class Fnv1a
{
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i)
        {
            h_ ^= c[i];
            h_ *= 0x100000001B3ULL;
        }
    }
    void text(const std::string& s)
    {
        bytes(s.data(), s.size());
        bytes("\0", 1);
    }
    void number(double x) { word(std::bit_cast<std::uint64_t>(x)); }
    void word(std::uint64_t w)
    {
        for (int i = 0; i < 8; ++i)
        {
            const auto b = static_cast<unsigned char>(w >> (8 * i));
            bytes(&b, 1);
        }
    }
    void matrix(const Matrix& m)
    {
        word(static_cast<std::uint64_t>(m.rows()));
        word(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                number(m(i, j).real());
                number(m(i, j).imag());
            }
    }
    std::string hex() const
    {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

}  // namespace detail

// content hash of the instance data; independent of seed and index
inline std::string instance_digest(const Instance& inst)
{
    detail::Fnv1a h;
    h.text(inst.profile);
    if (inst.a)
        for (const auto& m : inst.a->blocks()) h.matrix(m);
    if (inst.phi)
        for (const auto& m : inst.phi->k_blocks()) h.matrix(m);
    if (inst.rule) h.text(io::rule_to_json(*inst.rule).dump());
    if (inst.sparse)
        for (const auto& [n, k] : inst.sparse->blocks())
        {
            h.word(n);
            h.matrix(k);
        }
    return h.hex();
}

namespace detail
{

inline BlockStructure draw_structure(const Profile& p, Rng& rng)
{
    if (!p.dims.empty()) return BlockStructure(p.dims);
    std::vector<int> dims(static_cast<std::size_t>(rng.uniform_int(1, 3)));
    for (auto& d : dims) d = rng.uniform_int(1, p.max_dim);
    return BlockStructure(dims);
}

inline Operator draw_operator(ProfileKind kind, const BlockStructure& s, Rng& rng)
{
    std::vector<Matrix> blocks;
    if (kind == ProfileKind::central)
    {
        for (int d : s.dims()) blocks.push_back(rng.uniform(0.1, 10.0) * Matrix::Identity(d, d));
        return Operator::make_hermitian(s, std::move(blocks));
    }
    const double scale = rng.log_uniform(0.1, 10.0);
    std::vector<int> rank(s.dims().begin(), s.dims().end());
    if (kind == ProfileKind::noninj)
    {
        for (std::size_t b = 0; b < rank.size(); ++b) rank[b] = rng.uniform_int(0, s.dim(b));
        const auto b = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(s.size()) - 1));
        rank[b] = rng.uniform_int(0, s.dim(b) - 1);
    }
    for (std::size_t b = 0; b < s.size(); ++b)
    {
        RealVector ev = RealVector::Zero(s.dim(b));
        for (int i = 0; i < rank[b]; ++i) ev(i) = scale * rng.log_uniform(1e-3, 1.0);
        blocks.push_back(gen::with_spectrum(ev, rng));
    }
    return Operator::make_hermitian(s, std::move(blocks));
}

}  // namespace detail

inline Instance gen_instance(const Profile& p, std::uint64_t seed, std::uint64_t index)
{
    Rng rng = Rng::stream(seed, index);
    Instance inst{p.text, seed, index, std::nullopt, std::nullopt, std::nullopt, std::nullopt, ""};
    if (p.kind == ProfileKind::diag_linear || p.kind == ProfileKind::diag_seeded)
    {
        // the operator depends on the seed only; functionals vary per index
        inst.rule = p.kind == ProfileKind::diag_linear ? UnboundedBlockOperator::linear()
                                                      : UnboundedBlockOperator::seeded_psd(seed, p.rule_dim);
        SparseFunctional::Map k;
        const int count = rng.uniform_int(1, 5);
        for (int c = 0; c < count; ++c)
        {
            const auto n = static_cast<std::size_t>(rng.uniform_int(1, 50));
            k[n] = gen::hermitian(inst.rule->dim(n), rng);
        }
        inst.sparse = SparseFunctional(std::move(k));
    }
    else
    {
        const auto s = detail::draw_structure(p, rng);
        inst.a = detail::draw_operator(p.kind, s, rng);
        std::vector<Matrix> k;
        for (int d : s.dims()) k.push_back(gen::hermitian(d, rng));
        inst.phi = Functional::make_hermitian(s, std::move(k));
    }
    inst.digest = instance_digest(inst);
    return inst;
}

inline Instance gen_instance(const std::string& profile, std::uint64_t seed, std::uint64_t index)
{
    return gen_instance(parse_profile(profile), seed, index);
}

namespace io
{

inline json to_json(const Instance& inst)
{
    json out{{"profile", inst.profile}, {"seed", inst.seed}, {"index", inst.index}, {"digest", inst.digest}};
    if (inst.rule)
    {
        out["model"] = "diagonal";
        out["rule"] = rule_to_json(*inst.rule);
        out["support"] = to_json(inst.sparse.value_or(SparseFunctional{}));
    }
    else
    {
        out["model"] = "finite";
        out["a"] = to_json(inst.a.value());
        out["phi"] = to_json(inst.phi.value());
    }
    return out;
}

// digest is recomputed; a stored digest that disagrees is rejected
inline Instance instance_from_json(const json& j)
{
    Instance inst;
    inst.profile = j.value("profile", std::string{});
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.index = j.value("index", std::uint64_t{0});
    const std::string model = j.value("model", std::string("finite"));
    if (model == "diagonal")
    {
        inst.rule = rule_from_json(detail::field(j, "rule"));
        inst.sparse = sparse_from_json(j.value("support", json::object()));
        opl1::detail::check_dims(*inst.rule, *inst.sparse);
    }
    else if (model == "finite")
    {
        inst.a = operator_from_json(detail::field(j, "a"));
        inst.phi = functional_from_json(detail::field(j, "phi"));
        if (!(inst.a->structure() == inst.phi->structure())) detail::fail("a and phi have different block structures");
    }
    else
        detail::fail("unknown model '" + model + "'");
    inst.digest = instance_digest(inst);
    if (j.contains("digest") && j.at("digest").get<std::string>() != inst.digest)
        detail::fail("digest mismatch: stored " + j.at("digest").get<std::string>() + ", computed " + inst.digest);
    return inst;
}

}  // namespace io

}  // namespace opl1

#endif
