#ifndef OPL1_FUNCTIONAL_HPP_
#define OPL1_FUNCTIONAL_HPP_

//
// normal functionals phi(x) = sum_b tr(k_b x_b), stored by their density k
//

#include <string>
#include <utility>
#include <vector>

#include "algebra.hpp"

namespace opl1
{

class Functional
{
public:
    Functional(BlockStructure structure, std::vector<Matrix> k_blocks, bool hermitian = false)
        : density_(std::move(structure), std::move(k_blocks), hermitian)
    {
    }

    explicit Functional(Operator density) : density_(std::move(density)) {}

    static Functional zero(const BlockStructure& s) { return Functional(Operator::zero(s)); }

    // symmetrizes the density; for results that are Hermitian by construction
    static Functional make_hermitian(BlockStructure s, std::vector<Matrix> k_blocks)
    {
        return Functional(Operator::make_hermitian(std::move(s), std::move(k_blocks)));
    }

    const BlockStructure& structure() const { return density_.structure(); }
    const std::vector<Matrix>& k_blocks() const { return density_.blocks(); }
    const Matrix& k_block(std::size_t b) const { return density_.block(b); }
    const Operator& density() const { return density_; }
    bool hermitian() const { return density_.hermitian(); }
    bool is_self_adjoint() const { return density_.is_self_adjoint(); }

    friend Functional operator+(const Functional& f, const Functional& g) { return Functional(f.density_ + g.density_); }
    friend Functional operator-(const Functional& f, const Functional& g) { return Functional(f.density_ - g.density_); }
    friend Functional operator*(double c, const Functional& f) { return Functional(c * f.density_); }

private:
    Operator density_;
};

// phi(x) = sum_b tr(k_b x_b)
inline Complex evaluate(const Functional& phi, const Operator& x)
{
    if (!(phi.structure() == x.structure())) throw invalid_input("evaluate: structure mismatch");
    Complex r = 0.0;
    for (std::size_t b = 0; b < x.block_count(); ++b) r += (phi.k_block(b) * x.block(b)).trace();
    return r;
}

// real part of phi(x); the pairing is real for Hermitian phi, x
inline double evaluate_real(const Functional& phi, const Operator& x) { return evaluate(phi, x).real(); }

// norm in the predual: sum of trace norms of the density blocks
inline double functional_norm(const Functional& phi) { return trace_norm(phi.density()); }

struct JordanPair
{
    Functional plus;
    Functional minus;

    Functional abs() const { return plus + minus; }
    Functional reconstruct() const { return plus - minus; }
};

// canonical splitting phi = phi+ - phi- into orthogonally supported positive parts
inline JordanPair jordan_decompose(const Functional& phi)
{
    if (!phi.is_self_adjoint()) throw invalid_input("jordan_decompose: functional is not Hermitian");
    const auto e = hermitian_eig(phi.density());
    auto plus = e.map([](double t) { return t > 0.0 ? t : 0.0; });
    auto minus = e.map([](double t) { return t < 0.0 ? -t : 0.0; });
    return {Functional(std::move(plus)), Functional(std::move(minus))};
}

inline bool is_positive(const Functional& phi)
{
    if (!phi.is_self_adjoint()) return false;
    return is_psd(hermitian_eig(phi.density()));
}

// x -> <x f, f>, density f f^*; one vector per block
inline Functional vector_state(const std::vector<Vector>& f, const BlockStructure& s)
{
    if (f.size() != s.size()) throw invalid_input("vector_state: one vector per block required");
    std::vector<Matrix> k;
    for (std::size_t b = 0; b < s.size(); ++b)
    {
        if (f[b].size() != s.dim(b)) throw invalid_input("vector_state: vector " + std::to_string(b) + " has wrong size");
        k.push_back(f[b] * f[b].adjoint());
    }
    return Functional::make_hermitian(s, std::move(k));
}

// vector state supported in a single block
inline Functional vector_state(const Vector& f, std::size_t block, const BlockStructure& s)
{
    std::vector<Vector> fs;
    for (std::size_t b = 0; b < s.size(); ++b) fs.push_back(b == block ? f : Vector::Zero(s.dim(b)));
    return vector_state(fs, s);
}

// a^{1/2} phi a^{1/2}, density a^{1/2} k a^{1/2}
inline Functional a_sandwich(const Operator& a, const Functional& phi)
{
    if (!(a.structure() == phi.structure())) throw invalid_input("a_sandwich: structure mismatch");
    const Operator root = op_sqrt(a);
    std::vector<Matrix> k;
    for (std::size_t b = 0; b < a.block_count(); ++b) k.push_back(root.block(b) * phi.k_block(b) * root.block(b));
    if (phi.is_self_adjoint()) return Functional::make_hermitian(a.structure(), std::move(k));
    return Functional(a.structure(), std::move(k));
}

// p phi p: x -> phi(p x p), density p k p
inline Functional compress_functional(const Operator& p, const Functional& phi)
{
    if (!(p.structure() == phi.structure())) throw invalid_input("compress_functional: structure mismatch");
    std::vector<Matrix> k;
    for (std::size_t b = 0; b < p.block_count(); ++b) k.push_back(p.block(b) * phi.k_block(b) * p.block(b));
    if (phi.is_self_adjoint()) return Functional::make_hermitian(p.structure(), std::move(k));
    return Functional(p.structure(), std::move(k));
}

// sign(k) = P+ - P-: a unit-norm element with phi(u) = ||phi||
inline Operator polar_unitary(const Functional& phi)
{
    if (!phi.is_self_adjoint()) throw invalid_input("polar_unitary: functional is not Hermitian");
    return hermitian_eig(phi.density()).map([](double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); });
}

}  // namespace opl1

#endif
