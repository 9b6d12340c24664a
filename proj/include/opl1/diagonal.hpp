#ifndef OPL1_DIAGONAL_HPP_
#define OPL1_DIAGONAL_HPP_

//
// Infinite block-diagonal positive operators a = diag(a_1, a_2, ...) with ||a_n|| -> infinity,
// finitely supported functionals, weights as countable sums of such functionals, and the
// constructive decomposition of a-norm Cauchy sequences. Block indices start at 1.
//

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "anorm.hpp"
#include "functional.hpp"
#include "rng.hpp"

namespace opl1
{

class UnboundedBlockOperator
{
public:
    using Rule = std::function<Matrix(std::size_t)>;

    UnboundedBlockOperator(std::string kind, Rule rule)
        : kind_(std::move(kind)), rule_(std::move(rule)), cache_(std::make_shared<Cache>())
    {
        if (!rule_) throw invalid_input("UnboundedBlockOperator: empty rule");
    }

    // a_n = slope * n on one-dimensional blocks
    static UnboundedBlockOperator linear(double slope = 1.0)
    {
        if (!(slope > 0.0) || !std::isfinite(slope)) throw invalid_input("linear: slope must be positive");
        UnboundedBlockOperator op("linear", [slope](std::size_t n) {
            return Matrix::Constant(1, 1, Complex(slope * static_cast<double>(n), 0.0));
        });
        op.slope_ = slope;
        return op;
    }

    // a_n = n P_n, P_n a random positive d x d matrix with spectrum in [0.1, 1] and unit norm
    static UnboundedBlockOperator seeded_psd(std::uint64_t seed, int dim)
    {
        if (dim < 1) throw invalid_input("seeded_psd: dim must be >= 1");
        UnboundedBlockOperator op("seeded_psd", [seed, dim](std::size_t n) {
            Rng rng = Rng::stream(seed, n);
            Matrix g(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
            const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
            RealVector ev(dim);
            for (int i = 0; i < dim; ++i) ev(i) = rng.uniform(0.1, 1.0);
            ev /= ev.maxCoeff();
            const Matrix p = q * ev.cast<Complex>().asDiagonal() * q.adjoint();
            return Matrix(static_cast<double>(n) * detail::hermitian_part(p));
        });
        op.seed_ = seed;
        op.dim_ = dim;
        return op;
    }

    const std::string& kind() const { return kind_; }
    std::optional<double> slope() const { return slope_; }
    std::optional<std::uint64_t> seed() const { return seed_; }
    std::optional<int> rule_dim() const { return dim_; }

    // the n-th block; evaluated once and cached together with all earlier blocks
    const Matrix& block(std::size_t n) const
    {
        if (n == 0) throw invalid_input("UnboundedBlockOperator: block indices start at 1");
        std::lock_guard lock(cache_->mutex);
        auto& blocks = cache_->blocks;
        while (blocks.size() < n)
        {
            Matrix m = rule_(blocks.size() + 1);
            if (m.rows() < 1 || m.rows() != m.cols() || !detail::is_hermitian(m))
                throw invalid_input("UnboundedBlockOperator: rule produced a non-Hermitian block");
            m = detail::hermitian_part(m);
            const auto e = detail::jacobi_eig(m);
            const double rho = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
            if (e.values(0) < -tol::psd_cutoff * rho)
                throw invalid_input("UnboundedBlockOperator: rule produced a block that is not positive");
            blocks.push_back(std::move(m));
        }
        return blocks[n - 1];
    }

    int dim(std::size_t n) const { return static_cast<int>(block(n).rows()); }

    std::size_t evaluated() const
    {
        std::lock_guard lock(cache_->mutex);
        return cache_->blocks.size();
    }

    // positive definite on the given blocks
    bool injective_on(const std::vector<std::size_t>& support) const
    {
        for (std::size_t n : support)
            if (support_rank(Operator::single(block(n))) != dim(n)) return false;
        return true;
    }

private:
    struct Cache
    {
        std::mutex mutex;
        std::deque<Matrix> blocks;
    };

    std::string kind_;
    Rule rule_;
    std::shared_ptr<Cache> cache_;
    std::optional<double> slope_;
    std::optional<std::uint64_t> seed_;
    std::optional<int> dim_;
};

// phi(x) = sum_{n in support} tr(k_n x_n)
class SparseFunctional
{
public:
    using Map = std::map<std::size_t, Matrix>;

    SparseFunctional() = default;

    explicit SparseFunctional(Map k) : k_(std::move(k))
    {
        for (auto& [n, m] : k_)
        {
            if (n == 0) throw invalid_input("SparseFunctional: block indices start at 1");
            if (m.rows() < 1 || m.rows() != m.cols()) throw invalid_input("SparseFunctional: blocks must be square");
            if (!m.allFinite()) throw invalid_input("SparseFunctional: non-finite entry");
            if (!detail::is_hermitian(m)) throw invalid_input("SparseFunctional: blocks must be Hermitian");
            m = detail::hermitian_part(m);
        }
    }

    static SparseFunctional scalar(const std::map<std::size_t, double>& k)
    {
        Map m;
        for (const auto& [n, v] : k) m.emplace(n, Matrix::Constant(1, 1, Complex(v, 0.0)));
        return SparseFunctional(std::move(m));
    }

    const Map& blocks() const { return k_; }
    bool empty() const { return k_.empty(); }

    std::vector<std::size_t> support() const
    {
        std::vector<std::size_t> s;
        for (const auto& [n, m] : k_) s.push_back(n);
        return s;
    }

    // zero matrix for indices outside the support
    Matrix at(std::size_t n, int dim) const
    {
        const auto it = k_.find(n);
        return it == k_.end() ? Matrix::Zero(dim, dim) : it->second;
    }

    friend SparseFunctional operator+(const SparseFunctional& f, const SparseFunctional& g)
    {
        Map m = f.k_;
        for (const auto& [n, k] : g.k_)
        {
            auto [it, inserted] = m.emplace(n, k);
            if (!inserted)
            {
                if (it->second.rows() != k.rows()) throw invalid_input("SparseFunctional: block size mismatch");
                it->second += k;
            }
        }
        SparseFunctional r;
        r.k_ = std::move(m);
        return r;
    }

    friend SparseFunctional operator*(double c, const SparseFunctional& f)
    {
        SparseFunctional r = f;
        for (auto& [n, k] : r.k_) k *= c;
        return r;
    }

    friend SparseFunctional operator-(const SparseFunctional& f, const SparseFunctional& g) { return f + (-1.0) * g; }

private:
    Map k_;
};

namespace detail
{

inline void check_dims(const UnboundedBlockOperator& a, const SparseFunctional& phi)
{
    for (const auto& [n, k] : phi.blocks())
        if (k.rows() != a.dim(n)) throw invalid_input("SparseFunctional: block " + std::to_string(n) + " has wrong size");
}

inline Matrix block_sqrt(const Matrix& m) { return op_sqrt(Operator::single(m)).block(0); }

}  // namespace detail

// the finite algebra on the given blocks, in ascending index order
inline Operator truncate(const UnboundedBlockOperator& a, const std::vector<std::size_t>& support)
{
    if (support.empty()) throw invalid_input("truncate: empty support");
    std::vector<int> dims;
    std::vector<Matrix> blocks;
    for (std::size_t n : support)
    {
        dims.push_back(a.dim(n));
        blocks.push_back(a.block(n));
    }
    return Operator::make_hermitian(BlockStructure(dims), std::move(blocks));
}

inline Functional to_finite(const UnboundedBlockOperator& a, const SparseFunctional& phi,
                            const std::vector<std::size_t>& support)
{
    std::vector<int> dims;
    std::vector<Matrix> k;
    for (std::size_t n : support)
    {
        dims.push_back(a.dim(n));
        k.push_back(phi.at(n, a.dim(n)));
    }
    return Functional::make_hermitian(BlockStructure(dims), std::move(k));
}

inline SparseFunctional from_finite(const Functional& phi, const std::vector<std::size_t>& support)
{
    if (phi.structure().size() != support.size()) throw invalid_input("from_finite: support size mismatch");
    SparseFunctional::Map m;
    for (std::size_t b = 0; b < support.size(); ++b) m.emplace(support[b], detail::hermitian_part(phi.k_block(b)));
    return SparseFunctional(std::move(m));
}

// phi(a); finite because the support is
inline double evaluate(const UnboundedBlockOperator& a, const SparseFunctional& phi)
{
    detail::check_dims(a, phi);
    double r = 0.0;
    for (const auto& [n, k] : phi.blocks()) r += (k * a.block(n)).trace().real();
    return r;
}

inline bool is_positive(const UnboundedBlockOperator& a, const SparseFunctional& phi)
{
    detail::check_dims(a, phi);
    for (const auto& [n, k] : phi.blocks())
        if (!is_psd(Operator::single(k))) return false;
    return true;
}

// sum_n ||a_n^{1/2} k_n a_n^{1/2}||_1
inline double unbounded_a_norm(const UnboundedBlockOperator& a, const SparseFunctional& phi)
{
    detail::check_dims(a, phi);
    double r = 0.0;
    for (const auto& [n, k] : phi.blocks())
    {
        const Matrix s = detail::block_sqrt(a.block(n));
        r += detail::trace_norm_hermitian(detail::hermitian_part(s * k * s));
    }
    return r;
}

namespace detail
{

inline void require_grid(const std::vector<double>& grid, const char* who)
{
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw invalid_input(std::string(who) + ": grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw invalid_input(std::string(who) + ": grid must be ascending");
    }
}

inline Matrix cutoff_sqrt(const Matrix& a, double lambda)
{
    return op_sqrt(resolvent_cutoff(Operator::single(a), lambda)).block(0);
}

}  // namespace detail

// ||phi||_{a_lambda} for each lambda on the grid
inline std::vector<double> regularized_norm_scan(const UnboundedBlockOperator& a, const SparseFunctional& phi,
                                                 const std::vector<double>& grid)
{
    detail::require_grid(grid, "regularized_norm_scan");
    detail::check_dims(a, phi);
    std::vector<double> out;
    out.reserve(grid.size());
    for (double l : grid)
    {
        double r = 0.0;
        for (const auto& [n, k] : phi.blocks())
        {
            const Matrix s = detail::cutoff_sqrt(a.block(n), l);
            r += detail::trace_norm_hermitian(detail::hermitian_part(s * k * s));
        }
        out.push_back(r);
    }
    return out;
}

// bounded block operator; called with the block index and its dimension
using BlockMap = std::function<Matrix(std::size_t, int)>;

inline BlockMap identity_map()
{
    return [](std::size_t, int d) { return Matrix(Matrix::Identity(d, d)); };
}

struct SandwichScan
{
    Complex direct;                 // sum_n tr(a_n^{1/2} k_n a_n^{1/2} x_n)
    std::vector<Complex> values;    // phi(a_l^{1/2} x a_l^{1/2}) per grid point
    std::vector<double> residuals;  // |direct - value|
    double residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
};

inline SandwichScan sandwich_limit_check(const UnboundedBlockOperator& a, const SparseFunctional& phi, const BlockMap& x,
                                         const std::vector<double>& grid)
{
    detail::require_grid(grid, "sandwich_limit_check");
    detail::check_dims(a, phi);
    SandwichScan r{Complex(0.0), {}, {}};
    std::map<std::size_t, Matrix> xs;
    for (const auto& [n, k] : phi.blocks())
    {
        Matrix xn = x(n, a.dim(n));
        if (xn.rows() != a.dim(n) || xn.cols() != a.dim(n)) throw invalid_input("sandwich_limit_check: x block size mismatch");
        const Matrix s = detail::block_sqrt(a.block(n));
        r.direct += (s * k * s * xn).trace();
        xs.emplace(n, std::move(xn));
    }
    for (double l : grid)
    {
        Complex v(0.0);
        for (const auto& [n, k] : phi.blocks())
        {
            const Matrix s = detail::cutoff_sqrt(a.block(n), l);
            v += (k * s * xs.at(n) * s).trace();
        }
        r.values.push_back(v);
        r.residuals.push_back(std::abs(r.direct - v));
    }
    return r;
}

//////////////////////////////////////////////////////////////////////
//
// weights
//
//////////////////////////////////////////////////////////////////////

// Phi = sum_i omega_i with positive terms; tail_bound(N) >= sum_{i > N} omega_i(a)
struct WeightRep
{
    std::function<SparseFunctional(std::size_t)> term;  // i >= 1
    std::function<double(std::size_t)> tail_bound;
    std::optional<std::size_t> count;  // number of terms when finite
};

// omega_i = i^{-3} at block i; against a_i = i the masses are i^{-2}
inline WeightRep basel_weight()
{
    return {[](std::size_t i) {
                const double x = static_cast<double>(i);
                return SparseFunctional::scalar({{i, 1.0 / (x * x * x)}});
            },
            [](std::size_t n) {
                if (n == 0) return std::numbers::pi * std::numbers::pi / 6.0;
                return 1.0 / (static_cast<double>(n) + 0.5);
            },
            std::nullopt};
}

// finitely many terms; the tail bound is the exact remaining mass
inline WeightRep finite_weight(const UnboundedBlockOperator& a, std::vector<SparseFunctional> terms)
{
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (!is_positive(a, terms[i])) throw invalid_input("finite_weight: term " + std::to_string(i + 1) + " is not positive");
    std::vector<double> tail(terms.size() + 1, 0.0);
    for (std::size_t i = terms.size(); i-- > 0;) tail[i] = tail[i + 1] + evaluate(a, terms[i]);
    auto shared = std::make_shared<std::vector<SparseFunctional>>(std::move(terms));
    return {[shared](std::size_t i) { return shared->at(i - 1); },
            [tail](std::size_t n) { return n < tail.size() ? tail[n] : 0.0; }, shared->size()};
}

struct Embedding
{
    SparseFunctional phi;  // sum_{i <= N} omega_i
    std::size_t n;
    double achieved_tail;               // tail_bound(N)
    std::vector<double> partial_values;  // phi_i(a), i = 1..N
};

// smallest N with tail_bound(N) <= eps
inline Embedding embed_weight(const UnboundedBlockOperator& a, const WeightRep& w, double eps,
                              std::size_t budget = 1'000'000)
{
    if (!(eps > 0.0)) throw invalid_input("embed_weight: eps must be positive");
    if (!w.term || !w.tail_bound) throw invalid_input("embed_weight: incomplete weight");
    const std::size_t limit = w.count ? std::min(*w.count, budget) : budget;
    if (!(w.tail_bound(limit) <= eps)) throw budget_exhausted("embed_weight: tail bound stays above eps within the budget");

    std::size_t lo = 0, hi = limit;  // tail_bound(hi) <= eps
    if (w.tail_bound(0) <= eps) hi = 0;
    while (hi - lo > 1)
    {
        const std::size_t mid = lo + (hi - lo) / 2;
        (w.tail_bound(mid) <= eps ? hi : lo) = mid;
    }

    Embedding r{SparseFunctional{}, hi, w.tail_bound(hi), {}};
    double total = 0.0;
    for (std::size_t i = 1; i <= hi; ++i)
    {
        const SparseFunctional t = w.term(i);
        if (!is_positive(a, t)) throw invalid_input("embed_weight: term " + std::to_string(i) + " is not positive");
        r.phi = r.phi + t;
        total += evaluate(a, t);
        r.partial_values.push_back(total);
    }
    return r;
}

//////////////////////////////////////////////////////////////////////
//
// regular decomposition
//
//////////////////////////////////////////////////////////////////////

// modulus(n) >= sup_{m >= n} ||omega_m - omega_n||_a, nonincreasing
struct CauchySequence
{
    std::function<SparseFunctional(std::size_t)> term;  // n >= 1
    std::function<double(std::size_t)> modulus;
};

struct RegularDecomposition
{
    std::vector<std::size_t> subsequence;
    std::vector<SparseFunctional> plus_parts, minus_parts;
    SparseFunctional plus, minus;  // plus - minus = omega at the last subsequence index
    double slack_total;
    double error_bound;  // modulus(last) + slack_total
};

inline double default_slack(std::size_t n) { return std::ldexp(1.0, -static_cast<int>(n)); }

//
// Picks n_1 < n_2 < ... <= horizon with modulus(n_j) <= 2^-j, splits each increment
// omega_{n_j} - omega_{n_{j-1}} into positive parts with cost within slack(j) of its a-norm,
// and sums the parts.
//
inline RegularDecomposition regular_decomposition(const UnboundedBlockOperator& a, const CauchySequence& seq,
                                                  std::size_t horizon,
                                                  const std::function<double(std::size_t)>& slack = default_slack)
{
    if (horizon < 1) throw invalid_input("regular_decomposition: horizon must be >= 1");
    if (!seq.term || !seq.modulus) throw invalid_input("regular_decomposition: incomplete sequence");

    std::vector<SparseFunctional> terms;
    for (std::size_t n = 1; n <= horizon; ++n) terms.push_back(seq.term(n));
    for (std::size_t n = 1; n <= horizon; ++n)
    {
        const double m = seq.modulus(n);
        if (!(m >= 0.0) || !std::isfinite(m)) throw invalid_input("regular_decomposition: modulus must be finite and >= 0");
        if (n > 1 && m > seq.modulus(n - 1)) throw invalid_input("regular_decomposition: modulus must be nonincreasing");
        if (n < horizon)
        {
            const double d = unbounded_a_norm(a, terms[n] - terms[n - 1]);
            if (d > m * (1.0 + 1e-9) + 1e-12)
                throw invalid_input("regular_decomposition: increment " + std::to_string(n) + " exceeds the modulus");
        }
    }

    RegularDecomposition r{};
    std::size_t n = 1;
    for (std::size_t j = 1; n <= horizon; ++j)
    {
        const double target = std::ldexp(1.0, -static_cast<int>(j));
        while (n <= horizon && seq.modulus(n) > target) ++n;
        if (n > horizon) break;
        r.subsequence.push_back(n);
        ++n;
    }
    if (r.subsequence.empty()) throw invalid_input("regular_decomposition: modulus never drops below 1/2 within the horizon");

    for (std::size_t j = 0; j < r.subsequence.size(); ++j)
    {
        const std::size_t nj = r.subsequence[j];
        const SparseFunctional inc = j == 0 ? terms[nj - 1] : terms[nj - 1] - terms[r.subsequence[j - 1] - 1];
        const double s = slack(j + 1);
        if (!(s > 0.0)) throw invalid_input("regular_decomposition: slack must be positive");
        r.slack_total += s;
        SparseFunctional p, m;
        if (!inc.empty())
        {
            const auto support = inc.support();
            const auto cert = decomposition_infimum(truncate(a, support), to_finite(a, inc, support), 0, 0, s);
            p = from_finite(cert.witness_plus, support);
            m = from_finite(cert.witness_minus, support);
        }
        r.plus = r.plus + p;
        r.minus = r.minus + m;
        r.plus_parts.push_back(std::move(p));
        r.minus_parts.push_back(std::move(m));
    }
    r.error_bound = seq.modulus(r.subsequence.back()) + r.slack_total;
    return r;
}

}  // namespace opl1

#endif
