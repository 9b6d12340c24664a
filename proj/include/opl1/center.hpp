#ifndef OPL1_CENTER_HPP_
#define OPL1_CENTER_HPP_

//
// Executable forms of the center-affiliation equivalences. For bounded a the map
// m_a is phi -> phi(a); every check returns a signed gap that is <= 0 (up to round-off)
// whenever a is central:
//
//   (ii)   compression     (p phi p)(a) - phi(a)                        phi >= 0, p projection
//   (iii)  decomposition   phi+(a) - phi1(a)                             phi = phi1 - phi2
//   (iv)   monotone        phi+(a) - psi+(a)                             phi <= psi
//   (v)    subadd_pos      (phi+psi)+(a) - phi+(a) - psi+(a)
//   (vi)   convex_pos      (l phi + (1-l) psi)+(a) - l phi+(a) - (1-l) psi+(a)
//   (vii)  subadd_abs      |phi+psi|(a) - |phi|(a) - |psi|(a)
//   (viii) convex_abs      |l phi + (1-l) psi|(a) - l |phi|(a) - (1-l) |psi|(a)
//

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anorm.hpp"
#include "functional.hpp"
#include "rng.hpp"

namespace opl1
{

enum class CenterItem
{
    compression,
    decomposition,
    monotone,
    subadd_pos,
    convex_pos,
    subadd_abs,
    convex_abs
};

inline constexpr std::array<CenterItem, 7> all_center_items{
    CenterItem::compression, CenterItem::decomposition, CenterItem::monotone,  CenterItem::subadd_pos,
    CenterItem::convex_pos,  CenterItem::subadd_abs,    CenterItem::convex_abs};

inline std::string_view to_string(CenterItem item)
{
    switch (item)
    {
        case CenterItem::compression: return "compression";
        case CenterItem::decomposition: return "decomposition";
        case CenterItem::monotone: return "monotone";
        case CenterItem::subadd_pos: return "subadd_pos";
        case CenterItem::convex_pos: return "convex_pos";
        case CenterItem::subadd_abs: return "subadd_abs";
        case CenterItem::convex_abs: return "convex_abs";
    }
    return "?";
}

// accepts the item name or its roman numeral
inline std::optional<CenterItem> parse_center_item(std::string_view s)
{
    static constexpr std::array<std::string_view, 7> roman{"ii", "iii", "iv", "v", "vi", "vii", "viii"};
    for (std::size_t i = 0; i < all_center_items.size(); ++i)
        if (s == to_string(all_center_items[i]) || s == roman[i]) return all_center_items[i];
    return std::nullopt;
}

// reported violations have normalized gap above this
inline constexpr double violation_threshold = 1e-9;

inline double m_a(const Operator& a, const Functional& phi) { return evaluate_real(phi, a); }

inline double positive_mass(const Operator& a, const Functional& phi) { return m_a(a, jordan_decompose(phi).plus); }

inline double abs_mass(const Operator& a, const Functional& phi) { return m_a(a, jordan_decompose(phi).abs()); }

namespace detail
{

inline void require_positive(const Functional& phi, const char* who)
{
    if (!is_positive(phi)) throw invalid_input(std::string(who) + ": functional must be positive");
}

inline void require_unit_interval(double l, const char* who)
{
    if (!(l >= 0.0 && l <= 1.0)) throw invalid_input(std::string(who) + ": lambda must lie in [0, 1]");
}

}  // namespace detail

inline double check_compression(const Operator& a, const Operator& p, const Functional& phi)
{
    detail::require_positive(phi, "check_compression");
    if (!is_projection(p)) throw invalid_input("check_compression: p is not a projection");
    return m_a(a, compress_functional(p, phi)) - m_a(a, phi);
}

inline double check_decomposition(const Operator& a, const Functional& phi1, const Functional& phi2)
{
    detail::require_positive(phi1, "check_decomposition");
    detail::require_positive(phi2, "check_decomposition");
    return positive_mass(a, phi1 - phi2) - m_a(a, phi1);
}

inline double check_monotone(const Operator& a, const Functional& phi, const Functional& psi)
{
    if (!is_positive(psi - phi)) throw invalid_input("check_monotone: requires phi <= psi");
    return positive_mass(a, phi) - positive_mass(a, psi);
}

inline double check_subadd_pos(const Operator& a, const Functional& phi, const Functional& psi)
{
    return positive_mass(a, phi + psi) - positive_mass(a, phi) - positive_mass(a, psi);
}

inline double check_convex_pos(const Operator& a, const Functional& phi, const Functional& psi, double l)
{
    detail::require_unit_interval(l, "check_convex_pos");
    return positive_mass(a, l * phi + (1.0 - l) * psi) - l * positive_mass(a, phi) - (1.0 - l) * positive_mass(a, psi);
}

inline double check_subadd_abs(const Operator& a, const Functional& phi, const Functional& psi)
{
    return abs_mass(a, phi + psi) - abs_mass(a, phi) - abs_mass(a, psi);
}

inline double check_convex_abs(const Operator& a, const Functional& phi, const Functional& psi, double l)
{
    detail::require_unit_interval(l, "check_convex_abs");
    return abs_mass(a, l * phi + (1.0 - l) * psi) - l * abs_mass(a, phi) - (1.0 - l) * abs_mass(a, psi);
}

//////////////////////////////////////////////////////////////////////
//
// violations and reports
//
//////////////////////////////////////////////////////////////////////

// the functionals and parameters of one check; `psi` carries phi2 for (iii)
struct CenterProbe
{
    CenterItem item;
    Functional phi;
    std::optional<Functional> psi;
    std::optional<Operator> projection;
    std::optional<double> lambda;
};

struct Violation
{
    CenterProbe probe;
    double gap;
    double normalized_gap;  // gap / (||a|| max(||phi||_1, ||psi||_1))
};

struct CenterCheckReport
{
    CenterItem item;
    int samples = 0;
    double max_normalized_gap = -std::numeric_limits<double>::infinity();
    std::vector<Violation> violations;  // sorted by gap, largest first
};

inline double run_probe(const Operator& a, const CenterProbe& pr)
{
    switch (pr.item)
    {
        case CenterItem::compression: return check_compression(a, pr.projection.value(), pr.phi);
        case CenterItem::decomposition: return check_decomposition(a, pr.phi, pr.psi.value());
        case CenterItem::monotone: return check_monotone(a, pr.phi, pr.psi.value());
        case CenterItem::subadd_pos: return check_subadd_pos(a, pr.phi, pr.psi.value());
        case CenterItem::convex_pos: return check_convex_pos(a, pr.phi, pr.psi.value(), pr.lambda.value());
        case CenterItem::subadd_abs: return check_subadd_abs(a, pr.phi, pr.psi.value());
        case CenterItem::convex_abs: return check_convex_abs(a, pr.phi, pr.psi.value(), pr.lambda.value());
    }
    return 0.0;
}

inline double normalize_gap(const Operator& a, const CenterProbe& pr, double gap)
{
    double k = functional_norm(pr.phi);
    if (pr.psi) k = std::max(k, functional_norm(*pr.psi));
    const double scale = operator_norm(a) * k;
    return scale > 0.0 ? gap / scale : gap;
}

inline Violation evaluate_probe(const Operator& a, CenterProbe pr)
{
    const double gap = run_probe(a, pr);
    const double ng = normalize_gap(a, pr, gap);
    return {std::move(pr), gap, ng};
}

namespace detail
{

// m_a of the positive part / absolute value from raw densities through Eigen's solver
inline double independent_mass(const Operator& a, const Functional& phi, bool absolute)
{
    double r = 0.0;
    for (std::size_t b = 0; b < a.block_count(); ++b)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(phi.k_block(b)));
        RealVector w = es.eigenvalues();
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = absolute ? std::abs(w(i)) : std::max(w(i), 0.0);
        const Matrix part = es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
        r += (part * a.block(b)).trace().real();
    }
    return r;
}

inline double plain_mass(const Operator& a, const Functional& phi)
{
    double r = 0.0;
    for (std::size_t b = 0; b < a.block_count(); ++b) r += (phi.k_block(b) * a.block(b)).trace().real();
    return r;
}

}  // namespace detail

// recomputes the gap without the library's Jacobi path
inline double reverify_gap(const Operator& a, const CenterProbe& pr)
{
    using detail::independent_mass;
    using detail::plain_mass;
    const auto pos = [&](const Functional& f) { return independent_mass(a, f, false); };
    const auto abs = [&](const Functional& f) { return independent_mass(a, f, true); };
    switch (pr.item)
    {
        case CenterItem::compression:
        {
            const Operator& p = *pr.projection;
            double r = 0.0;
            for (std::size_t b = 0; b < a.block_count(); ++b)
                r += (p.block(b) * pr.phi.k_block(b) * p.block(b) * a.block(b)).trace().real();
            return r - plain_mass(a, pr.phi);
        }
        case CenterItem::decomposition: return pos(pr.phi - *pr.psi) - plain_mass(a, pr.phi);
        case CenterItem::monotone: return pos(pr.phi) - pos(*pr.psi);
        case CenterItem::subadd_pos: return pos(pr.phi + *pr.psi) - pos(pr.phi) - pos(*pr.psi);
        case CenterItem::convex_pos:
        {
            const double l = *pr.lambda;
            return pos(l * pr.phi + (1.0 - l) * *pr.psi) - l * pos(pr.phi) - (1.0 - l) * pos(*pr.psi);
        }
        case CenterItem::subadd_abs: return abs(pr.phi + *pr.psi) - abs(pr.phi) - abs(*pr.psi);
        case CenterItem::convex_abs:
        {
            const double l = *pr.lambda;
            return abs(l * pr.phi + (1.0 - l) * *pr.psi) - l * abs(pr.phi) - (1.0 - l) * abs(*pr.psi);
        }
    }
    return 0.0;
}

//////////////////////////////////////////////////////////////////////
//
// sampling
//
//////////////////////////////////////////////////////////////////////

namespace detail
{

inline Matrix gaussian_block(int rows, int cols, Rng& rng)
{
    Matrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
    return g;
}

inline Functional sample_hermitian(const BlockStructure& s, Rng& rng)
{
    std::vector<Matrix> k;
    for (int d : s.dims())
    {
        const Matrix g = gaussian_block(d, d, rng);
        k.push_back(g + g.adjoint());
    }
    return Functional::make_hermitian(s, std::move(k));
}

inline Functional sample_positive(const BlockStructure& s, Rng& rng)
{
    std::vector<Matrix> k;
    for (int d : s.dims())
    {
        const Matrix g = gaussian_block(d, rng.uniform_int(1, d), rng);
        k.push_back(g * g.adjoint());
    }
    return Functional::make_hermitian(s, std::move(k));
}

inline Operator sample_projection(const BlockStructure& s, Rng& rng)
{
    return hermitian_eig(sample_hermitian(s, rng).density()).map([](double t) { return t > 0.0 ? 1.0 : 0.0; });
}

inline CenterProbe random_probe(CenterItem item, const BlockStructure& s, Rng& rng)
{
    switch (item)
    {
        case CenterItem::compression:
            return {item, sample_positive(s, rng), std::nullopt, sample_projection(s, rng), std::nullopt};
        case CenterItem::decomposition:
        {
            // phi1 = phi+ + r, phi2 = phi- + r, or a generic pair of positives
            if (rng.uniform() < 0.5)
            {
                const auto j = jordan_decompose(sample_hermitian(s, rng));
                const auto r = sample_positive(s, rng);
                return {item, j.plus + r, j.minus + r, std::nullopt, std::nullopt};
            }
            return {item, sample_positive(s, rng), sample_positive(s, rng), std::nullopt, std::nullopt};
        }
        case CenterItem::monotone:
        {
            const auto phi = sample_hermitian(s, rng);
            return {item, phi, phi + sample_positive(s, rng), std::nullopt, std::nullopt};
        }
        case CenterItem::subadd_pos:
        case CenterItem::subadd_abs:
            return {item, sample_hermitian(s, rng), sample_hermitian(s, rng), std::nullopt, std::nullopt};
        case CenterItem::convex_pos:
        case CenterItem::convex_abs:
            return {item, sample_hermitian(s, rng), sample_hermitian(s, rng), std::nullopt, rng.uniform()};
    }
    throw invalid_input("random_probe: unknown item");
}

inline void finalize(CenterCheckReport& r)
{
    std::sort(r.violations.begin(), r.violations.end(),
              [](const Violation& x, const Violation& y) { return x.gap > y.gap; });
}

}  // namespace detail

//
// `samples` random checks per item; every reported violation is re-verified independently.
// Sample i of item j uses substream (seed, j * samples + i).
//
inline std::vector<CenterCheckReport> sample_center_checks(const Operator& a, int samples, std::uint64_t seed,
                                                           const std::vector<CenterItem>& items = {
                                                               all_center_items.begin(), all_center_items.end()})
{
    if (samples < 0) throw invalid_input("sample_center_checks: samples must be >= 0");
    if (!a.is_self_adjoint()) throw invalid_input("sample_center_checks: a must be Hermitian");
    std::vector<CenterCheckReport> out;
    for (std::size_t j = 0; j < items.size(); ++j)
    {
        CenterCheckReport rep{items[j], 0, -std::numeric_limits<double>::infinity(), {}};
        for (int i = 0; i < samples; ++i)
        {
            Rng rng = Rng::stream(seed, j * static_cast<std::uint64_t>(samples) + static_cast<std::uint64_t>(i));
            auto v = evaluate_probe(a, detail::random_probe(items[j], a.structure(), rng));
            ++rep.samples;
            rep.max_normalized_gap = std::max(rep.max_normalized_gap, v.normalized_gap);
            if (v.normalized_gap > violation_threshold) rep.violations.push_back(std::move(v));
        }
        detail::finalize(rep);
        out.push_back(std::move(rep));
    }
    return out;
}

//////////////////////////////////////////////////////////////////////
//
// counterexample search
//
//////////////////////////////////////////////////////////////////////

namespace detail
{

inline Vector unit_gaussian(int d, Rng& rng) { return gaussian_block(d, 1, rng).col(0).normalized(); }

// maximize f on [lo, hi] by golden-section; returns (argmax, max)
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int evals)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < evals; ++i)
    {
        if (f1 < f2)
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        else
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// rank-one probe family in block b: states at f and g, signed weights, convex weight l
struct RankOneProbe
{
    CenterItem item;
    std::size_t block;
    Vector f, g;
    double s1, s2, l;
    Vector h = {};  // negative part of phi for (iv)

    CenterProbe build(const BlockStructure& st) const
    {
        const auto state = [&](const Vector& v) { return vector_state(v, block, st); };
        switch (item)
        {
            case CenterItem::compression:
            {
                const auto pv = state(g);
                return {item, std::abs(s1) * state(f), std::nullopt, pv.density(), std::nullopt};
            }
            case CenterItem::decomposition:
                return {item, std::abs(s1) * state(f), std::abs(s2) * state(g), std::nullopt, std::nullopt};
            case CenterItem::monotone:
            {
                Functional phi = std::abs(s1) * state(f);
                if (h.size() > 0) phi = phi - std::abs(s2) * state(h);
                return {item, phi, phi + 2.0 * l * state(g), std::nullopt, std::nullopt};
            }
            case CenterItem::subadd_pos:
            case CenterItem::subadd_abs:
                return {item, s1 * state(f), s2 * state(g), std::nullopt, std::nullopt};
            case CenterItem::convex_pos:
            case CenterItem::convex_abs:
                return {item, s1 * state(f), s2 * state(g), std::nullopt, l};
        }
        throw invalid_input("RankOneProbe: unknown item");
    }
};

// rotate g toward h (orthogonalized against g) by angle t
inline Vector rotate(const Vector& g, const Vector& h, double t)
{
    Vector h_perp = h - g * g.dot(h);
    const double n = h_perp.norm();
    if (n < 1e-14) return g;
    h_perp /= n;
    return (std::cos(t) * g + std::sin(t) * h_perp).normalized();
}

}  // namespace detail

//
// Heuristic search for a violation of any of `items` for non-central a.
//
// The seed set comes first: in each non-scalar block with extreme eigenvectors u (lowest),
// w (highest) it scans the two-projection families
//   (ii)  phi = state(u), p = proj(cos t u + sin t w)
//   (ii)  p = proj(v), phi = state(cos t v + sin t v'),  v, v' = (u +- w)/sqrt2
//   (vii) phi = state(u), psi = -state(cos t u + sin t w)
//   (iv)  phi = u w* + w u*, psi = phi + r proj(cos t u + sin t w)
// Remaining trials draw random rank-one pairs with weights in [-2, 2] and refine by
// golden-section over a rotation angle. Trial t uses substream (seed, t).
//
inline std::optional<Violation> counterexample_search(const Operator& a, int trials, std::uint64_t seed,
                                                      const std::vector<CenterItem>& items = {
                                                          all_center_items.begin(), all_center_items.end()})
{
    if (!a.is_self_adjoint()) throw invalid_input("counterexample_search: a must be Hermitian");
    if (is_central(a)) throw invalid_input("counterexample_search: a is central");
    if (trials < 1 || items.empty()) throw invalid_input("counterexample_search: need trials >= 1 and at least one item");

    const auto& st = a.structure();
    std::vector<std::size_t> candidates;
    for (std::size_t b = 0; b < st.size(); ++b)
        if (!is_central(Operator::single(a.block(b)))) candidates.push_back(b);

    const auto wants = [&](CenterItem it) { return std::find(items.begin(), items.end(), it) != items.end(); };

    std::optional<Violation> best;
    const auto consider = [&](Violation v) {
        if (!best || v.normalized_gap > best->normalized_gap) best = std::move(v);
    };

    constexpr int refine_evals = 40;
    const double half_pi = std::numbers::pi / 2.0;

    std::vector<std::function<void()>> seeds;
    for (std::size_t b : candidates)
    {
        const auto e = detail::jacobi_eig(a.block(b));
        const Vector u = e.vectors.col(0);
        const Vector w = e.vectors.col(e.vectors.cols() - 1);
        if (wants(CenterItem::compression))
        {
            seeds.emplace_back([&, b, u, w] {
                detail::RankOneProbe pr{CenterItem::compression, b, u, u, 1.0, 1.0, 0.5};
                const auto f = [&](double t) {
                    pr.g = std::cos(t) * u + std::sin(t) * w;
                    return evaluate_probe(a, pr.build(st)).normalized_gap;
                };
                const auto [t, val] = detail::golden_max(f, 0.0, half_pi, refine_evals);
                pr.g = std::cos(t) * u + std::sin(t) * w;
                consider(evaluate_probe(a, pr.build(st)));
            });
            seeds.emplace_back([&, b, u, w] {
                const Vector v = (u + w) / std::numbers::sqrt2;
                const Vector vp = (u - w) / std::numbers::sqrt2;
                detail::RankOneProbe pr{CenterItem::compression, b, v, v, 1.0, 1.0, 0.5};
                const auto f = [&](double t) {
                    pr.f = std::cos(t) * v + std::sin(t) * vp;
                    return evaluate_probe(a, pr.build(st)).normalized_gap;
                };
                for (const auto& [lo, hi] : {std::pair{-half_pi, 0.0}, std::pair{0.0, half_pi}})
                {
                    const auto [t, val] = detail::golden_max(f, lo, hi, refine_evals);
                    pr.f = std::cos(t) * v + std::sin(t) * vp;
                    consider(evaluate_probe(a, pr.build(st)));
                }
            });
        }
        if (wants(CenterItem::monotone))
        {
            // phi = u w* + w u*, psi = phi + r proj(cos t u + sin t w)
            seeds.emplace_back([&, b, u, w] {
                const Matrix off = u * w.adjoint() + w * u.adjoint();
                std::vector<Matrix> k;
                for (std::size_t i = 0; i < st.size(); ++i)
                    k.push_back(i == b ? off : Matrix::Zero(st.dim(i), st.dim(i)));
                const auto phi = Functional::make_hermitian(st, std::move(k));
                for (double r : {0.5, 1.0, 2.0, 4.0})
                {
                    const auto probe = [&](double t) {
                        const Vector v = std::cos(t) * u + std::sin(t) * w;
                        return CenterProbe{CenterItem::monotone, phi, phi + r * vector_state(v, b, st), std::nullopt,
                                           std::nullopt};
                    };
                    const auto f = [&](double t) { return evaluate_probe(a, probe(t)).normalized_gap; };
                    for (const auto& [lo, hi] : {std::pair{-half_pi, 0.0}, std::pair{0.0, half_pi}})
                        consider(evaluate_probe(a, probe(detail::golden_max(f, lo, hi, refine_evals).first)));
                }
            });
        }
        if (wants(CenterItem::subadd_abs))
        {
            seeds.emplace_back([&, b, u, w] {
                detail::RankOneProbe pr{CenterItem::subadd_abs, b, u, u, 1.0, -1.0, 0.5};
                const auto f = [&](double t) {
                    pr.g = std::cos(t) * u + std::sin(t) * w;
                    return evaluate_probe(a, pr.build(st)).normalized_gap;
                };
                const auto [t, val] = detail::golden_max(f, 0.0, half_pi, refine_evals);
                pr.g = std::cos(t) * u + std::sin(t) * w;
                consider(evaluate_probe(a, pr.build(st)));
            });
        }
    }

    for (int t = 0; t < trials; ++t)
    {
        if (static_cast<std::size_t>(t) < seeds.size())
        {
            seeds[static_cast<std::size_t>(t)]();
            continue;
        }
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
        const std::size_t b = candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];
        const int d = st.dim(b);
        const CenterItem item = items[static_cast<std::size_t>(t) % items.size()];
        detail::RankOneProbe pr{item, b, detail::unit_gaussian(d, rng), detail::unit_gaussian(d, rng),
                                rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform()};
        if (item == CenterItem::monotone) pr.h = detail::unit_gaussian(d, rng);
        const Vector g0 = pr.g;
        const Vector h = detail::unit_gaussian(d, rng);
        const auto f = [&](double angle) {
            pr.g = detail::rotate(g0, h, angle);
            try
            {
                return evaluate_probe(a, pr.build(st)).normalized_gap;
            }
            catch (const invalid_input&)
            {
                return -std::numeric_limits<double>::infinity();
            }
        };
        const auto [angle, val] = detail::golden_max(f, -half_pi, half_pi, refine_evals / 2);
        pr.g = detail::rotate(g0, h, angle);
        consider(evaluate_probe(a, pr.build(st)));
    }

    if (best && best->normalized_gap > violation_threshold) return best;
    return std::nullopt;
}

}  // namespace opl1

#endif
