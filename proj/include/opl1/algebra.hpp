#ifndef OPL1_ALGEBRA_HPP_
#define OPL1_ALGEBRA_HPP_

//
// Finite-dimensional von Neumann algebras M = M_{d_1} (+) ... (+) M_{d_k}.
// Elements are lists of complex square blocks; the center is the set of
// block-scalar operators.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace opl1
{

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol
{
// Hermitian flag check, relative to 1 + max |entry|
inline constexpr double hermitian = 1e-12;
// kernel / PSD cutoff, relative to the spectral radius
inline constexpr double psd_cutoff = 1e-10;
// Jacobi stopping rule: off-diagonal Frobenius mass relative to block Frobenius norm
inline constexpr double jacobi = 1e-13;
// block-scalar test
inline constexpr double central = 1e-10;
// idempotence test for projections
inline constexpr double projection = 1e-9;
}  // namespace tol

//////////////////////////////////////////////////////////////////////
//
// block level helpers
//
//////////////////////////////////////////////////////////////////////

namespace detail
{

inline double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double rel = tol::hermitian)
{
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel * (1.0 + max_abs(m));
}

inline Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) * 0.5; }

struct BlockEig
{
    RealVector values;  // ascending
    Matrix vectors;     // columns are eigenvectors
};

//
// cyclic Jacobi for a complex Hermitian matrix
//
// Each rotation first removes the phase of a_pq with a diagonal unitary,
// then applies the real symmetric Jacobi rotation that annihilates it.
//
inline BlockEig jacobi_eig(const Matrix& h, int max_sweeps = 64)
{
    const Eigen::Index n = h.rows();
    Matrix a = hermitian_part(h);
    Matrix v = Matrix::Identity(n, n);

    const double scale = a.norm();
    if (n > 1 && scale > 0.0)
    {
        bool converged = false;
        for (int sweep = 0; sweep < max_sweeps; ++sweep)
        {
            double off = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    if (i != j) off += std::norm(a(i, j));
            if (std::sqrt(off) < tol::jacobi * scale)
            {
                converged = true;
                break;
            }

            for (Eigen::Index p = 0; p < n - 1; ++p)
            {
                for (Eigen::Index q = p + 1; q < n; ++q)
                {
                    const double apq = std::abs(a(p, q));
                    if (apq == 0.0) continue;

                    const Complex phase = a(p, q) / apq;
                    const double app = a(p, p).real();
                    const double aqq = a(q, q).real();
                    const double theta = (aqq - app) / (2.0 * apq);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double s = t * c;

                    // J = diag(1, conj(phase)) * [[c, s], [-s, c]] in the (p,q) plane
                    const Complex jpp = c;
                    const Complex jpq = s;
                    const Complex jqp = -s * std::conj(phase);
                    const Complex jqq = c * std::conj(phase);

                    for (Eigen::Index k = 0; k < n; ++k)
                    {
                        const Complex akp = a(k, p);
                        const Complex akq = a(k, q);
                        a(k, p) = akp * jpp + akq * jqp;
                        a(k, q) = akp * jpq + akq * jqq;
                    }
                    for (Eigen::Index k = 0; k < n; ++k)
                    {
                        const Complex apk = a(p, k);
                        const Complex aqk = a(q, k);
                        a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                        a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                    }
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    a(p, p) = a(p, p).real();
                    a(q, q) = a(q, q).real();

                    for (Eigen::Index k = 0; k < n; ++k)
                    {
                        const Complex vkp = v(k, p);
                        const Complex vkq = v(k, q);
                        v(k, p) = vkp * jpp + vkq * jqp;
                        v(k, q) = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
        if (!converged) throw numerical_error("jacobi_eig: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });

    BlockEig out{RealVector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k)
    {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

template <typename F>
Matrix spectral_map(const BlockEig& e, F&& f)
{
    RealVector mapped(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) mapped(i) = f(e.values(i));
    return e.vectors * mapped.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

// sum of |eigenvalues| of a Hermitian block
inline double trace_norm_hermitian(const Matrix& h)
{
    if (h.size() == 0) return 0.0;
    return jacobi_eig(h).values.cwiseAbs().sum();
}

// sum of singular values, via eigenvalues of m* m
inline double trace_norm(const Matrix& m)
{
    if (m.size() == 0) return 0.0;
    if (is_hermitian(m)) return trace_norm_hermitian(m);
    const RealVector ev = jacobi_eig(m.adjoint() * m).values;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) sum += std::sqrt(std::max(ev(i), 0.0));
    return sum;
}

inline double operator_norm(const Matrix& m)
{
    if (m.size() == 0) return 0.0;
    if (is_hermitian(m)) return jacobi_eig(m).values.cwiseAbs().maxCoeff();
    return std::sqrt(std::max(jacobi_eig(m.adjoint() * m).values.maxCoeff(), 0.0));
}

}  // namespace detail

//////////////////////////////////////////////////////////////////////
//
// BlockStructure / Operator
//
//////////////////////////////////////////////////////////////////////

class BlockStructure
{
public:
    explicit BlockStructure(std::vector<int> dims) : dims_(std::move(dims))
    {
        if (dims_.empty()) throw invalid_input("BlockStructure: no blocks");
        for (int d : dims_)
            if (d < 1) throw invalid_input("BlockStructure: block dimension must be >= 1");
    }

    const std::vector<int>& dims() const { return dims_; }
    std::size_t size() const { return dims_.size(); }
    int dim(std::size_t b) const { return dims_[b]; }
    int total_dim() const { return std::accumulate(dims_.begin(), dims_.end(), 0); }

    bool operator==(const BlockStructure&) const = default;

private:
    std::vector<int> dims_;
};

class Operator
{
public:
    Operator(BlockStructure structure, std::vector<Matrix> blocks, bool hermitian = false)
        : structure_(std::move(structure)), blocks_(std::move(blocks)), hermitian_(hermitian)
    {
        if (blocks_.size() != structure_.size()) throw invalid_input("Operator: block count does not match structure");
        for (std::size_t b = 0; b < blocks_.size(); ++b)
        {
            const auto& m = blocks_[b];
            if (m.rows() != structure_.dim(b) || m.cols() != structure_.dim(b))
                throw invalid_input("Operator: block " + std::to_string(b) + " has wrong size");
            if (!m.allFinite()) throw invalid_input("Operator: non-finite entry");
            if (hermitian_ && !detail::is_hermitian(m))
                throw invalid_input("Operator: hermitian flag set but block " + std::to_string(b) + " is not self-adjoint");
        }
    }

    // symmetrizes each block and sets the flag; for results that are Hermitian by construction
    static Operator make_hermitian(BlockStructure structure, std::vector<Matrix> blocks)
    {
        for (auto& m : blocks) m = detail::hermitian_part(m);
        return Operator(std::move(structure), std::move(blocks), true);
    }

    static Operator zero(const BlockStructure& s)
    {
        std::vector<Matrix> blocks;
        for (int d : s.dims()) blocks.push_back(Matrix::Zero(d, d));
        return Operator(s, std::move(blocks), true);
    }

    static Operator identity(const BlockStructure& s) { return scalar(s, 1.0); }

    static Operator scalar(const BlockStructure& s, double c)
    {
        std::vector<Matrix> blocks;
        for (int d : s.dims()) blocks.push_back(Matrix::Identity(d, d) * c);
        return Operator(s, std::move(blocks), true);
    }

    // block-scalar operator: c_b times the identity of block b
    static Operator block_scalar(const BlockStructure& s, const std::vector<double>& c)
    {
        if (c.size() != s.size()) throw invalid_input("block_scalar: one scalar per block required");
        std::vector<Matrix> blocks;
        for (std::size_t b = 0; b < s.size(); ++b) blocks.push_back(Matrix::Identity(s.dim(b), s.dim(b)) * c[b]);
        return Operator(s, std::move(blocks), true);
    }

    // single-block diagonal operator
    static Operator diagonal(const std::vector<double>& d)
    {
        const auto n = static_cast<Eigen::Index>(d.size());
        Matrix m = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return Operator(BlockStructure({static_cast<int>(n)}), {m}, true);
    }

    // single-block operator
    static Operator single(const Matrix& m)
    {
        return Operator(BlockStructure({static_cast<int>(m.rows())}), {m}, detail::is_hermitian(m));
    }

    const BlockStructure& structure() const { return structure_; }
    const std::vector<Matrix>& blocks() const { return blocks_; }
    const Matrix& block(std::size_t b) const { return blocks_[b]; }
    std::size_t block_count() const { return blocks_.size(); }
    bool hermitian() const { return hermitian_; }

    // true if every block is self-adjoint within tolerance, regardless of the flag
    bool is_self_adjoint() const
    {
        return std::all_of(blocks_.begin(), blocks_.end(), [](const Matrix& m) { return detail::is_hermitian(m); });
    }

    double max_abs() const
    {
        double r = 0.0;
        for (const auto& m : blocks_) r = std::max(r, detail::max_abs(m));
        return r;
    }

    Operator adjoint() const
    {
        std::vector<Matrix> out;
        for (const auto& m : blocks_) out.push_back(m.adjoint());
        return Operator(structure_, std::move(out), hermitian_);
    }

    friend Operator operator+(const Operator& x, const Operator& y)
    {
        check_same(x, y);
        std::vector<Matrix> out;
        for (std::size_t b = 0; b < x.blocks_.size(); ++b) out.push_back(x.blocks_[b] + y.blocks_[b]);
        return x.hermitian_ && y.hermitian_ ? make_hermitian(x.structure_, std::move(out))
                                            : Operator(x.structure_, std::move(out));
    }

    friend Operator operator-(const Operator& x, const Operator& y)
    {
        check_same(x, y);
        std::vector<Matrix> out;
        for (std::size_t b = 0; b < x.blocks_.size(); ++b) out.push_back(x.blocks_[b] - y.blocks_[b]);
        return x.hermitian_ && y.hermitian_ ? make_hermitian(x.structure_, std::move(out))
                                            : Operator(x.structure_, std::move(out));
    }

    friend Operator operator*(double c, const Operator& x)
    {
        std::vector<Matrix> out;
        for (const auto& m : x.blocks_) out.push_back(m * c);
        return Operator(x.structure_, std::move(out), x.hermitian_);
    }

    friend Operator operator*(const Operator& x, const Operator& y)
    {
        check_same(x, y);
        std::vector<Matrix> out;
        for (std::size_t b = 0; b < x.blocks_.size(); ++b) out.push_back(x.blocks_[b] * y.blocks_[b]);
        return Operator(x.structure_, std::move(out));
    }

    static void check_same(const Operator& x, const Operator& y)
    {
        if (!(x.structure_ == y.structure_)) throw invalid_input("structure mismatch");
    }

private:
    BlockStructure structure_;
    std::vector<Matrix> blocks_;
    bool hermitian_;
};

inline Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

// max over blocks of the block operator norm
inline double operator_norm(const Operator& x)
{
    double r = 0.0;
    for (const auto& m : x.blocks()) r = std::max(r, detail::operator_norm(m));
    return r;
}

inline double trace_norm(const Operator& x)
{
    double r = 0.0;
    for (const auto& m : x.blocks()) r += detail::trace_norm(m);
    return r;
}

inline Complex trace(const Operator& x)
{
    Complex r = 0.0;
    for (const auto& m : x.blocks()) r += m.trace();
    return r;
}

//////////////////////////////////////////////////////////////////////
//
// spectral decomposition
//
//////////////////////////////////////////////////////////////////////

class SpectralDecomposition
{
public:
    SpectralDecomposition(BlockStructure structure, std::vector<detail::BlockEig> blocks)
        : structure_(std::move(structure)), blocks_(std::move(blocks))
    {
    }

    const BlockStructure& structure() const { return structure_; }
    const std::vector<detail::BlockEig>& blocks() const { return blocks_; }
    const RealVector& eigenvalues(std::size_t b) const { return blocks_[b].values; }
    const Matrix& eigenvectors(std::size_t b) const { return blocks_[b].vectors; }

    double spectral_radius() const
    {
        double r = 0.0;
        for (const auto& e : blocks_) r = std::max(r, e.values.cwiseAbs().maxCoeff());
        return r;
    }

    double min_eigenvalue() const
    {
        double r = blocks_.front().values(0);
        for (const auto& e : blocks_) r = std::min(r, e.values(0));
        return r;
    }

    double max_eigenvalue() const
    {
        double r = blocks_.front().values(blocks_.front().values.size() - 1);
        for (const auto& e : blocks_) r = std::max(r, e.values(e.values.size() - 1));
        return r;
    }

    // f applied to the spectrum; result is Hermitian when f is real
    template <typename F>
    Operator map(F&& f) const
    {
        std::vector<Matrix> out;
        for (const auto& e : blocks_) out.push_back(detail::spectral_map(e, f));
        return Operator::make_hermitian(structure_, std::move(out));
    }

    Operator reconstruct() const
    {
        return map([](double t) { return t; });
    }

private:
    BlockStructure structure_;
    std::vector<detail::BlockEig> blocks_;
};

inline SpectralDecomposition hermitian_eig(const Operator& x)
{
    if (!x.is_self_adjoint()) throw invalid_input("hermitian_eig: operator is not Hermitian");
    std::vector<detail::BlockEig> blocks;
    for (const auto& m : x.blocks()) blocks.push_back(detail::jacobi_eig(m));
    return SpectralDecomposition(x.structure(), std::move(blocks));
}

// eigenvalues at or below this value count as zero
inline double kernel_cutoff(const SpectralDecomposition& e) { return tol::psd_cutoff * e.spectral_radius(); }

inline bool is_psd(const SpectralDecomposition& e) { return e.min_eigenvalue() >= -kernel_cutoff(e); }

inline bool is_psd(const Operator& x) { return x.is_self_adjoint() && is_psd(hermitian_eig(x)); }

inline Operator op_sqrt(const Operator& x)
{
    const auto e = hermitian_eig(x);
    if (!is_psd(e)) throw invalid_input("op_sqrt: operator is not positive semidefinite");
    // spectrum within the kernel cutoff is exactly zero
    const double cut = kernel_cutoff(e);
    return e.map([cut](double t) { return t > cut ? std::sqrt(t) : 0.0; });
}

inline Operator support_projection(const Operator& a)
{
    const auto e = hermitian_eig(a);
    if (!is_psd(e)) throw invalid_input("support_projection: operator is not positive semidefinite");
    const double cut = kernel_cutoff(e);
    return e.map([cut](double t) { return t > cut ? 1.0 : 0.0; });
}

// rank of the support projection
inline int support_rank(const Operator& a)
{
    const auto e = hermitian_eig(a);
    const double cut = kernel_cutoff(e);
    int r = 0;
    for (const auto& b : e.blocks()) r += static_cast<int>((b.values.array() > cut).count());
    return r;
}

inline bool is_projection(const Operator& p)
{
    if (!p.is_self_adjoint()) return false;
    for (const auto& m : p.blocks())
        if ((m * m - m).cwiseAbs().maxCoeff() > tol::projection) return false;
    return true;
}

//
// orthonormal basis of range(p) per block, from the eigendecomposition of p
// (columns with eigenvalue > 1/2); blocks of rank 0 yield d x 0 matrices
//
inline std::vector<Matrix> range_basis(const Operator& p)
{
    if (!is_projection(p)) throw invalid_input("range_basis: not a projection");
    std::vector<Matrix> out;
    for (const auto& m : p.blocks())
    {
        const auto e = detail::jacobi_eig(m);
        const auto n = e.values.size();
        Eigen::Index r = 0;
        while (r < n && e.values(n - 1 - r) > 0.5) ++r;
        out.push_back(e.vectors.rightCols(r));
    }
    return out;
}

struct Compression
{
    Operator op;                             // x_p on the blocks where p has positive rank
    std::vector<std::size_t> source_blocks;  // original block index of each block of op
    std::vector<Matrix> bases;               // per original block, d x rank isometry
};

inline Compression compress_with_basis(const Operator& x, const Operator& p)
{
    Operator::check_same(x, p);
    auto bases = range_basis(p);
    std::vector<int> dims;
    std::vector<Matrix> blocks;
    std::vector<std::size_t> source;
    for (std::size_t b = 0; b < bases.size(); ++b)
    {
        if (bases[b].cols() == 0) continue;
        dims.push_back(static_cast<int>(bases[b].cols()));
        blocks.push_back(bases[b].adjoint() * x.block(b) * bases[b]);
        source.push_back(b);
    }
    if (dims.empty()) throw invalid_input("compress: projection is zero");
    BlockStructure s(std::move(dims));
    Operator op = x.is_self_adjoint() ? Operator::make_hermitian(s, std::move(blocks)) : Operator(s, std::move(blocks));
    return {std::move(op), std::move(source), std::move(bases)};
}

// x_p = pxp restricted to range(p); blocks where p vanishes are dropped
inline Operator compress(const Operator& x, const Operator& p) { return compress_with_basis(x, p).op; }

// x <= y in the PSD order
inline bool psd_leq(const Operator& x, const Operator& y)
{
    Operator::check_same(x, y);
    if (!x.is_self_adjoint() || !y.is_self_adjoint()) throw invalid_input("psd_leq: operands must be Hermitian");
    const auto d = y - x;
    const auto e = hermitian_eig(d);
    return e.min_eigenvalue() >= -tol::psd_cutoff * (1.0 + operator_norm(d));
}

// a_lambda = lambda a (lambda + a)^{-1}
inline Operator resolvent_cutoff(const Operator& a, double lambda)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw invalid_input("resolvent_cutoff: lambda must be positive");
    const auto e = hermitian_eig(a);
    if (!is_psd(e)) throw invalid_input("resolvent_cutoff: operator is not positive semidefinite");
    return e.map([lambda](double t) {
        t = std::max(t, 0.0);
        return lambda * t / (lambda + t);
    });
}

// each block is a scalar multiple of its identity
inline bool is_central(const Operator& a)
{
    for (const auto& m : a.blocks())
    {
        const Complex c = m.trace() / static_cast<double>(m.rows());
        const Matrix diff = m - c * Matrix::Identity(m.rows(), m.cols());
        if (detail::max_abs(diff) > tol::central * (1.0 + detail::max_abs(m))) return false;
    }
    return true;
}

}  // namespace opl1

#endif
