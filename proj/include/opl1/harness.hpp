#ifndef OPL1_HARNESS_HPP_
#define OPL1_HARNESS_HPP_

//
// Suites of seeded trials. Trial i of a run with seed s depends on (s, i) only, so
// records are identical whatever the thread count.
//
// Report:
//   {"schema": "opl1.report/1", "suite": str, "config": {...},
//    "summary": {"trials": n, "passed": n, "failed": n, "pass": bool},
//    "records": [{"index": n, "digest": str, "pass": bool, "values": {str: number|null},
//                 "note": str (optional), "witness": object (optional)}]}
//

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "anorm.hpp"
#include "center.hpp"
#include "diagonal.hpp"
#include "generate.hpp"
#include "io.hpp"

namespace opl1::harness
{

using json = nlohmann::json;

enum class Suite
{
    oracle,
    faithfulness,
    duality,
    positivity,
    center,
    convergence,
    embedding,
    decomposition,
    semifinite
};

inline constexpr std::array<Suite, 9> all_suites{Suite::oracle,      Suite::faithfulness, Suite::duality,
                                                 Suite::positivity,  Suite::center,       Suite::convergence,
                                                 Suite::embedding,   Suite::decomposition, Suite::semifinite};

inline std::string_view to_string(Suite s)
{
    switch (s)
    {
        case Suite::oracle: return "oracle";
        case Suite::faithfulness: return "faithfulness";
        case Suite::duality: return "duality";
        case Suite::positivity: return "positivity";
        case Suite::center: return "center";
        case Suite::convergence: return "convergence";
        case Suite::embedding: return "embedding";
        case Suite::decomposition: return "decomposition";
        case Suite::semifinite: return "semifinite";
    }
    return "?";
}

inline std::optional<Suite> parse_suite(std::string_view s)
{
    for (auto x : all_suites)
        if (to_string(x) == s) return x;
    return std::nullopt;
}

struct SuiteConfig
{
    Suite suite = Suite::oracle;
    std::uint64_t seed = 0;
    std::string profile;
    int trials = 1;
    int audit_trials = 100;   // oracle
    int search_trials = 300;  // center on non-central profiles
    std::size_t horizon = 20;  // decomposition
    std::vector<double> lambda_grid;  // convergence
    std::map<std::string, double> tolerances;
    std::optional<CenterItem> item;  // center
    std::string output;              // report path, empty for none
    int threads = 0;                 // 0: hardware concurrency
};

inline std::map<std::string, double> default_tolerances(Suite s)
{
    switch (s)
    {
        case Suite::oracle: return {{"value", 1e-8}, {"audit", 1e-9}};
        case Suite::faithfulness: return {{"seminorm", 1e-12}, {"norm", 1e-12}, {"lower_bound", 1e-10}};
        case Suite::duality: return {{"bound", 1e-10}, {"attain", 1e-8}, {"dual", 1e-10}};
        case Suite::positivity: return {{"margin", 1e-3}};
        case Suite::center: return {{"gap", violation_threshold}};
        case Suite::convergence: return {{"monotone", 1e-12}, {"bound", 1e-12}};
        case Suite::embedding: return {{"cauchy", 1e-12}};
        case Suite::decomposition: return {{"positivity", 1e-10}};
        case Suite::semifinite: return {{"trace", 1e-10}};
    }
    return {};
}

inline std::string default_profile(Suite s)
{
    switch (s)
    {
        case Suite::center: return "central-rand8";
        case Suite::convergence:
        case Suite::embedding: return "diag-linear";
        case Suite::decomposition: return "diag-seeded-3";
        default: return "inj-rand8";
    }
}

inline std::vector<double> default_lambda_grid() { return {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6}; }

namespace detail
{

[[noreturn]] inline void reject(const std::string& what) { throw invalid_input("config: " + what); }

inline void validate(SuiteConfig& c)
{
    if (c.trials < 1) reject("trials must be >= 1");
    if (c.audit_trials < 0) reject("audit_trials must be >= 0");
    if (c.search_trials < 1) reject("search_trials must be >= 1");
    if (c.horizon < 1 || c.horizon > 60) reject("horizon must lie in [1, 60]");
    if (c.threads < 0) reject("threads must be >= 0");
    if (c.item && c.suite != Suite::center) reject("item applies to the center suite only");
    if (c.profile.empty()) c.profile = default_profile(c.suite);
    const Profile p = parse_profile(c.profile);
    const bool wants_diagonal =
        c.suite == Suite::convergence || c.suite == Suite::embedding || c.suite == Suite::decomposition;
    if (p.diagonal() != wants_diagonal)
        reject("profile '" + c.profile + "' does not fit suite " + std::string(to_string(c.suite)));
    if (c.suite == Suite::convergence)
    {
        if (c.lambda_grid.empty()) c.lambda_grid = default_lambda_grid();
        opl1::detail::require_grid(c.lambda_grid, "config lambda_grid");
    }
    auto tol = default_tolerances(c.suite);
    for (const auto& [k, v] : c.tolerances)
    {
        if (!tol.count(k)) reject("unknown tolerance '" + k + "' for suite " + std::string(to_string(c.suite)));
        if (!(v >= 0.0) || !std::isfinite(v)) reject("tolerance '" + k + "' must be finite and >= 0");
        tol[k] = v;
    }
    c.tolerances = std::move(tol);
}

}  // namespace detail

inline SuiteConfig config_from_json(const json& j)
{
    static const std::set<std::string> known{"suite",   "seed",        "profile",   "trials",    "audit_trials",
                                             "search_trials", "horizon", "lambda_grid", "tolerances", "item",
                                             "output",  "threads"};
    if (!j.is_object()) detail::reject("expected an object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) detail::reject("unknown key '" + k + "'");
    SuiteConfig c;
    try
    {
        const auto s = parse_suite(j.at("suite").get<std::string>());
        if (!s) detail::reject("unknown suite '" + j.at("suite").get<std::string>() + "'");
        c.suite = *s;
        c.seed = j.value("seed", std::uint64_t{0});
        c.profile = j.value("profile", std::string{});
        c.trials = j.value("trials", 1);
        c.audit_trials = j.value("audit_trials", c.audit_trials);
        c.search_trials = j.value("search_trials", c.search_trials);
        c.horizon = j.value("horizon", c.horizon);
        c.lambda_grid = j.value("lambda_grid", std::vector<double>{});
        c.tolerances = j.value("tolerances", std::map<std::string, double>{});
        if (j.contains("item"))
        {
            const auto it = parse_center_item(j.at("item").get<std::string>());
            if (!it) detail::reject("unknown center item '" + j.at("item").get<std::string>() + "'");
            c.item = *it;
        }
        c.output = j.value("output", std::string{});
        c.threads = j.value("threads", 0);
    }
    catch (const json::exception& e)
    {
        detail::reject(e.what());
    }
    detail::validate(c);
    return c;
}

inline json to_json(const SuiteConfig& c)
{
    json out{{"suite", to_string(c.suite)}, {"seed", c.seed},       {"profile", c.profile},
             {"trials", c.trials},          {"tolerances", c.tolerances}};
    if (c.suite == Suite::oracle) out["audit_trials"] = c.audit_trials;
    if (c.suite == Suite::center)
    {
        out["search_trials"] = c.search_trials;
        if (c.item) out["item"] = to_string(*c.item);
    }
    if (c.suite == Suite::decomposition) out["horizon"] = c.horizon;
    if (c.suite == Suite::convergence) out["lambda_grid"] = c.lambda_grid;
    return out;
}

// validates and fills defaults; for configs built in code
inline SuiteConfig finalize(SuiteConfig c)
{
    detail::validate(c);
    return c;
}

struct TrialRecord
{
    std::uint64_t index = 0;
    std::string digest;
    std::map<std::string, double> values;
    bool pass = false;
    std::string note;
    json witness;  // null when absent
};

struct SuiteReport
{
    SuiteConfig config;
    std::vector<TrialRecord> records;
    int passed = 0;
    int failed = 0;
    bool pass() const { return failed == 0; }
};

namespace detail
{

// stream for auxiliary draws of a trial, disjoint from the instance stream
inline Rng aux_rng(std::uint64_t seed, std::uint64_t index)
{
    return Rng::stream(Rng::stream(seed, 0xA5A5A5A5ULL).next_u64(), index);
}

inline std::string with_kind(const std::string& profile, const std::string& kind)
{
    return kind + profile.substr(profile.find('-'));
}

// sqrt of a with sub-cutoff spectrum as 0, through Eigen
inline Matrix oracle_sqrt(const Matrix& a, double cut)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(opl1::detail::hermitian_part(a));
    RealVector w = es.eigenvalues();
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = w(i) > cut ? std::sqrt(w(i)) : 0.0;
    return es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

inline double oracle_spectral_radius(const Operator& a)
{
    double r = 0.0;
    for (const auto& m : a.blocks())
        r = std::max(r, Eigen::SelfAdjointEigenSolver<Matrix>(opl1::detail::hermitian_part(m), Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff());
    return r;
}

inline double min_eigenvalue(const Matrix& m)
{
    return Eigen::SelfAdjointEigenSolver<Matrix>(opl1::detail::hermitian_part(m), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

struct Trial
{
    const SuiteConfig& c;
    std::uint64_t index;
    TrialRecord r;

    double tol(const char* k) const { return c.tolerances.at(k); }

    void check(bool ok, const std::string& what)
    {
        if (!ok)
        {
            r.pass = false;
            if (!r.note.empty()) r.note += "; ";
            r.note += what;
        }
    }

    Instance instance(const std::string& profile)
    {
        Instance inst = gen_instance(profile, c.seed, index);
        r.digest = inst.digest;
        return inst;
    }

    void oracle()
    {
        const auto inst = instance(c.profile);
        const double closed = closed_a_norm(*inst.a, *inst.phi);
        const auto cert = decomposition_infimum(*inst.a, *inst.phi, c.audit_trials, c.seed ^ index);
        r.values = {{"value", cert.value}, {"closed", closed}, {"gap", std::abs(cert.value - closed)}};
        check(std::abs(cert.value - closed) <= tol("value") * (1.0 + cert.value), "certificate value differs from closed form");
        if (cert.audit_floor)
        {
            r.values["audit_floor"] = *cert.audit_floor;
            check(*cert.audit_floor >= cert.value - tol("audit"), "audit undercut the certificate");
        }
        if (!r.pass) r.witness = io::to_json(cert);
    }

    void faithfulness()
    {
        const bool injective = index % 2 == 1;
        const auto inst = instance(with_kind(c.profile, injective ? "inj" : "noninj"));
        const auto& a = *inst.a;
        r.values["injective"] = injective ? 1.0 : 0.0;
        if (!injective)
        {
            const auto w = kernel_witness(a);
            check(w.has_value(), "no kernel witness");
            if (!w) return;
            const double semi = closed_a_norm(a, *w);
            const double raw = evaluate_real(*w, a);
            const double norm = functional_norm(*w);
            r.values.insert({{"seminorm", semi}, {"raw_mass", raw}, {"norm", norm}});
            check(semi <= tol("seminorm"), "witness seminorm too large");
            check(std::abs(raw) <= tol("seminorm") * (1.0 + operator_norm(a)), "witness does not vanish on a");
            check(std::abs(norm - 1.0) <= tol("norm"), "witness norm is not 1");
            if (!r.pass) r.witness = io::to_json(*w);
        }
        else
        {
            check(!kernel_witness(a).has_value(), "kernel witness on injective a");
            const double closed = closed_a_norm(a, *inst.phi);
            const double bound = hermitian_eig(a).min_eigenvalue() * functional_norm(*inst.phi);
            r.values.insert({{"closed", closed}, {"lower_bound", bound}});
            check(closed >= bound - tol("lower_bound"), "a-norm below lambda_min ||k||_1");
        }
    }

    void duality()
    {
        const bool injective = index % 2 == 1;
        const auto inst = instance(with_kind(c.profile, injective ? "inj" : "noninj"));
        const auto& a = *inst.a;
        const auto& phi = *inst.phi;
        Rng rng = aux_rng(c.seed, index);
        std::vector<Matrix> xb;
        for (int d : a.structure().dims()) xb.push_back(gen::hermitian(d, rng));
        const auto x = Operator::make_hermitian(a.structure(), std::move(xb));

        const double closed = closed_a_norm(a, phi);
        const double dual = dual_a_norm(a, x);
        const double pair = std::abs(pairing(a, phi, x));
        const auto w = polar_witness(a, phi);
        const double attained = pairing(a, phi, w).real();
        const double w_dual = dual_a_norm(a, w);

        // ||x_q|| through Eigen: q spans eigenvectors above the kernel cutoff
        const double cut = tol::psd_cutoff * oracle_spectral_radius(a);
        double oracle = 0.0;
        for (std::size_t b = 0; b < a.block_count(); ++b)
        {
            Eigen::SelfAdjointEigenSolver<Matrix> es(opl1::detail::hermitian_part(a.block(b)));
            std::vector<Eigen::Index> keep;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                if (es.eigenvalues()(i) > cut) keep.push_back(i);
            if (keep.empty()) continue;
            Matrix v(a.block(b).rows(), static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
            const Matrix xq = v.adjoint() * x.block(b) * v;
            oracle = std::max(oracle, Eigen::SelfAdjointEigenSolver<Matrix>(opl1::detail::hermitian_part(xq), Eigen::EigenvaluesOnly)
                                          .eigenvalues()
                                          .cwiseAbs()
                                          .maxCoeff());
        }
        const double xnorm = operator_norm(x);
        r.values = {{"injective", injective ? 1.0 : 0.0}, {"closed", closed}, {"dual", dual}, {"pairing", pair},
                    {"attained", attained},            {"witness_dual", w_dual}, {"compression_oracle", oracle},
                    {"x_norm", xnorm}};
        check(pair <= dual * closed + tol("bound") * (1.0 + dual * closed), "pairing exceeds the product of norms");
        check(std::abs(attained - closed) <= tol("attain") * (1.0 + closed), "polar witness does not attain the norm");
        check(w_dual <= 1.0 + tol("dual"), "polar witness dual norm above 1");
        check(std::abs(dual - oracle) <= tol("dual"), "dual norm differs from the compression oracle");
        if (injective) check(std::abs(dual - xnorm) <= tol("dual"), "dual norm differs from ||x|| on injective a");
    }

    void positivity()
    {
        const bool positive = index % 2 == 0;
        const auto inst = instance(with_kind(c.profile, "inj"));
        const auto& a = *inst.a;
        Rng rng = aux_rng(c.seed, index);
        const auto& s = a.structure();
        std::vector<Matrix> k;
        double neg_mass = 0.0;
        if (positive)
        {
            for (int d : s.dims()) k.push_back(gen::gram(d, rng.uniform_int(1, d), rng));
        }
        else
        {
            // k = a^{-1/2} h a^{-1/2} with tr(h-) >= margin
            std::vector<Matrix> h;
            for (int d : s.dims()) h.push_back(gen::hermitian(d, rng));
            const auto b = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(s.size()) - 1));
            const auto e = opl1::detail::jacobi_eig(h[b]);
            const double shift = e.values(0) + tol("margin");
            if (shift > 0.0) h[b] -= shift * e.vectors.col(0) * e.vectors.col(0).adjoint();
            const auto inv_root = hermitian_eig(a).map([](double t) { return 1.0 / std::sqrt(t); });
            for (std::size_t i = 0; i < s.size(); ++i)
            {
                const auto ev = opl1::detail::jacobi_eig(opl1::detail::hermitian_part(h[i]));
                for (Eigen::Index j = 0; j < ev.values.size(); ++j) neg_mass += std::max(-ev.values(j), 0.0);
                k.push_back(inv_root.block(i) * h[i] * inv_root.block(i));
            }
        }
        const auto phi = Functional::make_hermitian(s, std::move(k));
        const auto pi = positivity_identity(a, phi);
        r.values = {{"expected_positive", positive ? 1.0 : 0.0}, {"is_positive", pi.is_positive ? 1.0 : 0.0},
                    {"identity_holds", pi.identity_holds ? 1.0 : 0.0}, {"norm", pi.norm}, {"value", pi.value}};
        if (!positive)
        {
            r.values["negative_mass"] = neg_mass;
            check(neg_mass >= tol("margin") * (1.0 - 1e-9), "generated negative part below the margin");
        }
        check(pi.is_positive == positive, "positivity misclassified");
        check(pi.identity_holds == positive, "norm identity disagrees with positivity");
    }

    void center()
    {
        const auto inst = instance(c.profile);
        const auto& a = *inst.a;
        const std::vector<CenterItem> items =
            c.item ? std::vector<CenterItem>{*c.item} : std::vector<CenterItem>(all_center_items.begin(), all_center_items.end());
        if (is_central(a))
        {
            Rng rng = aux_rng(c.seed, index);
            const auto item = items[index % items.size()];
            const auto v = evaluate_probe(a, opl1::detail::random_probe(item, a.structure(), rng));
            r.values = {{"central", 1.0}, {"gap", v.gap}, {"normalized_gap", v.normalized_gap}};
            r.note = std::string(to_string(item));
            const bool ok = v.normalized_gap <= tol("gap");
            check(ok, "violation on central a");
            if (!ok) r.values["reverified_gap"] = reverify_gap(a, v.probe);
        }
        else
        {
            const auto v = counterexample_search(a, c.search_trials, c.seed ^ (index * 0x9E3779B97F4A7C15ULL), items);
            r.values = {{"central", 0.0}};
            check(v.has_value(), "no violation found on non-central a");
            if (!v) return;
            const double re = reverify_gap(a, v->probe);
            r.values.insert({{"gap", v->gap}, {"normalized_gap", v->normalized_gap}, {"reverified_gap", re}});
            check(re > 0.0, "violation not confirmed independently");
            r.note = std::string(to_string(v->probe.item));
            json w{{"item", to_string(v->probe.item)}, {"phi", io::to_json(v->probe.phi)}};
            if (v->probe.psi) w["psi"] = io::to_json(*v->probe.psi);
            if (v->probe.projection) w["projection"] = io::to_json(*v->probe.projection);
            if (v->probe.lambda) w["lambda"] = *v->probe.lambda;
            r.witness = std::move(w);
        }
    }

    void convergence()
    {
        const auto inst = instance(c.profile);
        const auto& a = *inst.rule;
        const auto& phi = *inst.sparse;
        const auto v = regularized_norm_scan(a, phi, c.lambda_grid);
        const double limit = unbounded_a_norm(a, phi);
        const double l = c.lambda_grid.back();
        // ||S k S - S_l k S_l||_1 <= ||k||_1 ||S - S_l|| (||S|| + ||S_l||)
        double bound = 0.0;
        for (const auto& [n, k] : phi.blocks())
        {
            const auto e = opl1::detail::jacobi_eig(a.block(n));
            double gap = 0.0;
            for (Eigen::Index i = 0; i < e.values.size(); ++i)
            {
                const double t = std::max(e.values(i), 0.0);
                gap = std::max(gap, std::sqrt(t) - std::sqrt(l * t / (l + t)));
            }
            bound += opl1::detail::trace_norm(k) * gap * 2.0 * std::sqrt(std::max(e.values(e.values.size() - 1), 0.0));
        }
        const auto sw = sandwich_limit_check(a, phi, identity_map(), c.lambda_grid);
        r.values = {{"limit", limit}, {"last", v.back()}, {"bound", bound}, {"sandwich_residual", sw.residual()}};
        const double slack = tol("monotone") * (1.0 + limit);
        bool monotone = true;
        for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] >= v[i - 1] - slack;
        check(monotone, "scan not monotone");
        check(v.back() <= limit + slack, "scan exceeds the limit");
        check(limit - v.back() <= bound + tol("bound") * (1.0 + limit), "scan outside the explicit bound");
        check(sw.residual() <= sw.residuals.front() + slack, "sandwich residual grew along the grid");
    }

    void embedding()
    {
        const auto inst = instance(c.profile);
        const auto& a = *inst.rule;
        Rng rng = aux_rng(c.seed, index);
        const int m = rng.uniform_int(5, 40);
        std::vector<SparseFunctional> terms;
        for (int i = 1; i <= m; ++i)
        {
            const auto n = static_cast<std::size_t>(i);
            const int d = a.dim(n);
            Matrix g = gen::gram(d, rng.uniform_int(1, d), rng);
            g *= rng.uniform(0.1, 1.0) / (static_cast<double>(i * i) * (g * a.block(n)).trace().real());
            terms.push_back(SparseFunctional({{n, g}}));
        }
        const auto w = finite_weight(a, terms);
        const double total = w.tail_bound(0);
        const double eps = rng.uniform(0.001, 0.9) * total;
        const auto e = embed_weight(a, w, eps);
        SparseFunctional all;
        double exact_tail = 0.0;
        for (int i = 1; i <= m; ++i)
        {
            all = all + terms[static_cast<std::size_t>(i - 1)];
            if (static_cast<std::size_t>(i) > e.n) exact_tail += evaluate(a, terms[static_cast<std::size_t>(i - 1)]);
        }
        const double cauchy = unbounded_a_norm(a, all - e.phi);
        r.values = {{"terms", m},          {"eps", eps}, {"n", static_cast<double>(e.n)}, {"achieved_tail", e.achieved_tail},
                    {"total", total},      {"cauchy", cauchy}, {"exact_tail", exact_tail}};
        check(e.achieved_tail <= eps, "tail above eps");
        check(e.n == 0 || w.tail_bound(e.n - 1) > eps, "N is not minimal");
        bool increasing = true;
        for (std::size_t i = 1; i < e.partial_values.size(); ++i)
            increasing = increasing && e.partial_values[i] >= e.partial_values[i - 1];
        check(increasing, "partial values decrease");
        check(std::abs(cauchy - exact_tail) <= tol("cauchy"), "Cauchy modulus differs from the exact tail");
    }

    void decomposition()
    {
        const auto inst = instance(c.profile);
        const auto& a = *inst.rule;
        const auto& target = *inst.sparse;
        Rng rng = aux_rng(c.seed, index);
        std::vector<SparseFunctional> rho;
        for (std::size_t n = 1; n <= c.horizon; ++n)
        {
            SparseFunctional::Map m;
            const int count = rng.uniform_int(1, 3);
            for (int j = 0; j < count; ++j)
            {
                const auto b = static_cast<std::size_t>(rng.uniform_int(1, 50));
                m[b] = gen::hermitian(a.dim(b), rng);
            }
            SparseFunctional p(std::move(m));
            rho.push_back((1.0 / unbounded_a_norm(a, p)) * p);
        }
        const CauchySequence seq{[&](std::size_t n) { return target + std::ldexp(1.0, -static_cast<int>(n)) * rho[n - 1]; },
                                 [](std::size_t n) { return std::ldexp(1.0, 1 - static_cast<int>(n)); }};
        const auto d = regular_decomposition(a, seq, c.horizon);
        double min_ev = std::numeric_limits<double>::infinity();
        for (const auto* part : {&d.plus, &d.minus})
            for (const auto& [n, k] : part->blocks()) min_ev = std::min(min_ev, min_eigenvalue(k));
        const double err = unbounded_a_norm(a, d.plus - d.minus - target);
        r.values = {{"min_eigenvalue", std::isfinite(min_ev) ? min_ev : 0.0}, {"error", err},
                    {"error_bound", d.error_bound}, {"slack_total", d.slack_total},
                    {"subsequence_length", static_cast<double>(d.subsequence.size())}};
        check(min_ev >= -tol("positivity"), "negative eigenvalue in a positive part");
        check(err <= d.error_bound, "reconstruction error above the bound");
    }

    void semifinite()
    {
        const auto inst = instance(c.profile);
        const auto& a = *inst.a;
        const double closed = closed_a_norm(a, *inst.phi);
        const double cut = tol::psd_cutoff * oracle_spectral_radius(a);
        double oracle = 0.0;
        for (std::size_t b = 0; b < a.block_count(); ++b)
        {
            const Matrix s = oracle_sqrt(a.block(b), cut);
            const Matrix h = opl1::detail::hermitian_part(s * inst.phi->k_block(b) * s);
            oracle += Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().sum();
        }
        r.values = {{"closed", closed}, {"trace_formula", oracle}, {"difference", std::abs(closed - oracle)}};
        check(std::abs(closed - oracle) <= tol("trace"), "closed form differs from the block trace formula");
    }

    void run()
    {
        r.index = index;
        r.pass = true;
        try
        {
            switch (c.suite)
            {
                case Suite::oracle: oracle(); break;
                case Suite::faithfulness: faithfulness(); break;
                case Suite::duality: duality(); break;
                case Suite::positivity: positivity(); break;
                case Suite::center: center(); break;
                case Suite::convergence: convergence(); break;
                case Suite::embedding: embedding(); break;
                case Suite::decomposition: decomposition(); break;
                case Suite::semifinite: semifinite(); break;
            }
        }
        catch (const invariant_violation& e)
        {
            check(false, std::string("invariant violation: ") + e.what());
        }
        catch (const numerical_error& e)
        {
            check(false, std::string("numerical error: ") + e.what());
        }
        catch (const invalid_input& e)
        {
            check(false, std::string("rejected input: ") + e.what());
        }
    }
};

template <typename F>
void parallel_for(std::size_t n, int threads, F&& f)
{
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try
            {
                for (std::size_t i = next++; i < n; i = next++) f(i);
            }
            catch (...)
            {
                errors[w] = std::current_exception();
                next = n;
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline TrialRecord run_trial(const SuiteConfig& c, std::uint64_t index)
{
    detail::Trial t{c, index, {}};
    t.run();
    return std::move(t.r);
}

inline SuiteReport run_suite(SuiteConfig c)
{
    detail::validate(c);
    SuiteReport rep{c, std::vector<TrialRecord>(static_cast<std::size_t>(c.trials)), 0, 0};
    detail::parallel_for(rep.records.size(), c.threads, [&](std::size_t i) { rep.records[i] = run_trial(rep.config, i); });
    for (const auto& r : rep.records) (r.pass ? rep.passed : rep.failed)++;
    return rep;
}

inline json to_json(const TrialRecord& r)
{
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = std::isfinite(v) ? json(v) : json(nullptr);
    json out{{"index", r.index}, {"digest", r.digest}, {"pass", r.pass}, {"values", std::move(values)}};
    if (!r.note.empty()) out["note"] = r.note;
    if (!r.witness.is_null()) out["witness"] = r.witness;
    return out;
}

inline json to_json(const SuiteReport& rep)
{
    json records = json::array();
    for (const auto& r : rep.records) records.push_back(to_json(r));
    return {{"schema", "opl1.report/1"},
            {"suite", to_string(rep.config.suite)},
            {"config", to_json(rep.config)},
            {"summary",
             {{"trials", rep.records.size()}, {"passed", rep.passed}, {"failed", rep.failed}, {"pass", rep.pass()}}},
            {"records", std::move(records)}};
}

// empty when the report matches the schema
inline std::vector<std::string> validate_report(const json& j)
{
    std::vector<std::string> errs;
    const auto need = [&](const json& o, const char* key, auto pred, const std::string& where) {
        if (!o.is_object() || !o.contains(key) || !pred(o.at(key)))
        {
            errs.push_back(where + ": bad or missing '" + key + "'");
            return false;
        }
        return true;
    };
    const auto is_string = [](const json& x) { return x.is_string(); };
    const auto is_object = [](const json& x) { return x.is_object(); };
    const auto is_bool = [](const json& x) { return x.is_boolean(); };
    const auto is_count = [](const json& x) { return x.is_number_unsigned() || (x.is_number_integer() && x.get<long long>() >= 0); };

    if (!j.is_object()) return {"report is not an object"};
    if (need(j, "schema", is_string, "report") && j.at("schema") != "opl1.report/1") errs.push_back("report: unknown schema");
    if (need(j, "suite", is_string, "report") && !parse_suite(j.at("suite").get<std::string>()))
        errs.push_back("report: unknown suite");
    need(j, "config", is_object, "report");
    if (need(j, "summary", is_object, "report"))
    {
        const auto& s = j.at("summary");
        need(s, "trials", is_count, "summary");
        need(s, "passed", is_count, "summary");
        need(s, "failed", is_count, "summary");
        need(s, "pass", is_bool, "summary");
    }
    if (!need(j, "records", [](const json& x) { return x.is_array(); }, "report")) return errs;
    std::size_t passed = 0;
    for (std::size_t i = 0; i < j.at("records").size(); ++i)
    {
        const auto& r = j.at("records")[i];
        const std::string where = "records[" + std::to_string(i) + "]";
        need(r, "index", is_count, where);
        need(r, "digest", is_string, where);
        if (need(r, "pass", is_bool, where) && r.at("pass").get<bool>()) ++passed;
        if (need(r, "values", is_object, where))
            for (const auto& [k, v] : r.at("values").items())
                if (!v.is_number() && !v.is_null()) errs.push_back(where + ": value '" + k + "' is not a number");
        if (r.is_object() && r.contains("note") && !r.at("note").is_string()) errs.push_back(where + ": note is not a string");
        if (r.is_object() && r.contains("witness") && !r.at("witness").is_object())
            errs.push_back(where + ": witness is not an object");
    }
    if (errs.empty())
    {
        const auto& s = j.at("summary");
        if (s.at("trials").get<std::size_t>() != j.at("records").size()) errs.push_back("summary: trial count mismatch");
        if (s.at("passed").get<std::size_t>() != passed) errs.push_back("summary: passed count mismatch");
        if (s.at("passed").get<std::size_t>() + s.at("failed").get<std::size_t>() != j.at("records").size())
            errs.push_back("summary: passed + failed != trials");
        if (s.at("pass").get<bool>() != (s.at("failed").get<std::size_t>() == 0)) errs.push_back("summary: pass flag mismatch");
    }
    return errs;
}

// one row per record: index, digest, pass, then the union of value keys in sorted order
inline std::string report_to_csv(const json& j)
{
    std::set<std::string> keys;
    for (const auto& r : j.at("records"))
        for (const auto& [k, v] : r.at("values").items()) keys.insert(k);
    std::ostringstream out;
    out.precision(17);
    out << "index,digest,pass";
    for (const auto& k : keys) out << ',' << k;
    out << '\n';
    for (const auto& r : j.at("records"))
    {
        out << r.at("index").get<std::uint64_t>() << ',' << r.at("digest").get<std::string>() << ','
            << (r.at("pass").get<bool>() ? 1 : 0);
        const auto& v = r.at("values");
        for (const auto& k : keys)
        {
            out << ',';
            if (v.contains(k) && v.at(k).is_number()) out << v.at(k).get<double>();
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace opl1::harness

#endif
