// One line per acceptance criterion; exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "opl1/opl1.hpp"

using namespace opl1;
using namespace opl1::harness;

namespace
{

struct Outcome
{
    bool pass;
    std::string detail;
};

struct Stats
{
    double max = -std::numeric_limits<double>::infinity();
    double min = std::numeric_limits<double>::infinity();
    void add(double v)
    {
        max = std::max(max, v);
        min = std::min(min, v);
    }
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SuiteReport suite(Suite s, int trials, std::uint64_t seed, const std::string& profile = {},
                  const std::function<void(SuiteConfig&)>& tweak = {})
{
    SuiteConfig c;
    c.suite = s;
    c.trials = trials;
    c.seed = seed;
    c.profile = profile;
    if (tweak) tweak(c);
    return run_suite(c);
}

std::string first_failure(const SuiteReport& r)
{
    for (const auto& t : r.records)
        if (!t.pass) return fmt(" first failure: trial %llu (%s)", static_cast<unsigned long long>(t.index), t.note.c_str());
    return "";
}

Outcome oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = suite(Suite::oracle, 500, 1001, "inj-rand8", [](SuiteConfig& c) {
        c.audit_trials = 100;
        c.tolerances = {{"value", 1e-8}, {"audit", 1e-9}};
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Stats rel, margin;
    for (const auto& t : r.records)
    {
        rel.add(t.values.at("gap") / (1.0 + t.values.at("value")));
        margin.add(t.values.at("audit_floor") - t.values.at("value"));
    }
    const bool ok = r.pass() && secs < 60.0;
    return {ok, fmt("%d/500 instances, max |value - closed|/(1+value) %.2e, min audit margin %.2e, %.1f s (limit 60 s)%s",
                    r.passed, rel.max, margin.min, secs, first_failure(r).c_str())};
}

Outcome norm_injectivity()
{
    const auto r = suite(Suite::faithfulness, 400, 1002, "inj-rand8");
    int non = 0, inj = 0;
    Stats semi, slack;
    for (const auto& t : r.records)
    {
        if (t.values.at("injective") == 0.0)
        {
            ++non;
            if (t.values.count("seminorm")) semi.add(t.values.at("seminorm"));
        }
        else
        {
            ++inj;
            slack.add(t.values.at("closed") - t.values.at("lower_bound"));
        }
    }
    const bool ok = r.pass() && non == 200 && inj == 200;
    return {ok, fmt("%d/400 pass (%d non-injective, %d injective), max witness seminorm %.2e, min margin over lambda_min ||k||_1 %.2e%s",
                    r.passed, non, inj, semi.max, slack.min, first_failure(r).c_str())};
}

Outcome duality()
{
    const auto r = suite(Suite::duality, 1000, 1003, "inj-rand8");
    Stats attain, dual_err, ratio;
    for (const auto& t : r.records)
    {
        const double closed = t.values.at("closed");
        attain.add(std::abs(t.values.at("attained") - closed) / (1.0 + closed));
        dual_err.add(std::abs(t.values.at("dual") - t.values.at("compression_oracle")));
        if (t.values.at("injective") == 1.0) dual_err.add(std::abs(t.values.at("dual") - t.values.at("x_norm")));
        const double prod = t.values.at("dual") * closed;
        if (prod > 0.0) ratio.add(t.values.at("pairing") / prod);
    }
    return {r.pass(), fmt("%d/1000 triples, max |pairing|/(dual*closed) %.6f, max attainment error %.2e, max dual-norm error %.2e%s",
                          r.passed, ratio.max, attain.max, dual_err.max, first_failure(r).c_str())};
}

Outcome positivity()
{
    const auto r = suite(Suite::positivity, 400, 1004, "inj-rand8");
    int pos = 0;
    Stats neg;
    for (const auto& t : r.records)
    {
        if (t.values.at("expected_positive") == 1.0)
            ++pos;
        else
            neg.add(t.values.at("negative_mass"));
    }
    const bool ok = r.pass() && pos == 200;
    return {ok, fmt("%d/400 agree (%d positive, %d non-positive), min negative-part mass %.2e%s", r.passed, pos,
                    400 - pos, neg.min, first_failure(r).c_str())};
}

Outcome center_battery()
{
    const auto r = suite(Suite::center, 10000, 1005, "central-rand8");
    Stats gap;
    for (const auto& t : r.records) gap.add(t.values.at("normalized_gap"));

    const auto a = Operator::diagonal({1.0, 4.0});
    const BlockStructure s{{2}};
    Vector e1(2), v(2);
    e1 << 1.0, 0.0;
    v << 0.6, 0.8;
    const Matrix pv = v * v.adjoint();
    const auto phi = vector_state(e1, 0, s);
    const CenterProbe ii{CenterItem::compression, phi, std::nullopt, Operator::single(pv), std::nullopt};
    const CenterProbe vii{CenterItem::subadd_abs, phi, Functional::make_hermitian(s, {-pv}), std::nullopt, std::nullopt};
    const double g2 = run_probe(a, ii), g2o = reverify_gap(a, ii);
    const double g7 = run_probe(a, vii), g7o = reverify_gap(a, vii);
    const bool fixtures = std::abs(g2 - 0.0512) <= 1e-10 && std::abs(g2o - 0.0512) <= 1e-10 &&
                          std::abs(g7 - 0.08) <= 1e-10 && std::abs(g7o - 0.08) <= 1e-10;
    return {r.pass() && fixtures,
            fmt("%d violations in %zu central checks (max normalized gap %.2e); fixture (vii) gap %.12f / %.12f, (ii) gap %.12f / %.12f (library / independent)%s",
                r.failed, r.records.size(), gap.max, g7, g7o, g2, g2o, first_failure(r).c_str())};
}

Outcome regularization()
{
    const auto a = UnboundedBlockOperator::linear();
    const auto phi = SparseFunctional::scalar({{1, 1.0}, {2, -1.0}, {3, 0.5}});
    const auto v = regularized_norm_scan(a, phi, {1.0, 10.0, 100.0, 1e6});
    const double expected[] = {1.541667, 3.729604, 4.407194};
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && std::abs(v[static_cast<std::size_t>(i)] - expected[i]) <= 1e-6;
    for (std::size_t i = 1; i < v.size(); ++i) ok = ok && v[i] >= v[i - 1];
    ok = ok && std::abs(v[3] - 4.5) <= 1e-4;
    const auto r = suite(Suite::convergence, 200, 1006, "diag-seeded-3");
    ok = ok && r.pass();
    return {ok, fmt("scan (%.6f, %.6f, %.6f), lambda=1e6 -> %.8f (|.-4.5| = %.2e), monotone; random scans %d/200 within explicit bounds%s",
                    v[0], v[1], v[2], v[3], std::abs(v[3] - 4.5), r.passed, first_failure(r).c_str())};
}

Outcome weight_embedding()
{
    const auto a = UnboundedBlockOperator::linear();
    const auto w = basel_weight();
    const auto e = embed_weight(a, w, 0.01);
    bool increasing = true;
    for (std::size_t i = 1; i < e.partial_values.size(); ++i) increasing = increasing && e.partial_values[i] > e.partial_values[i - 1];
    const double basel = std::numbers::pi * std::numbers::pi / 6.0;
    const bool brackets = e.partial_values.back() <= basel && e.partial_values.back() + e.achieved_tail >= basel;

    double worst = 0.0;
    const std::pair<double, double> pairs[] = {{0.5, 0.1}, {0.1, 0.01}, {0.01, 0.001}, {0.05, 0.0005}};
    for (const auto& [en, em] : pairs)
    {
        const auto n = embed_weight(a, w, en);
        const auto m = embed_weight(a, w, em);
        double tail = 0.0;
        for (std::size_t i = m.n; i > n.n; --i) tail += 1.0 / (static_cast<double>(i) * static_cast<double>(i));
        worst = std::max(worst, std::abs(unbounded_a_norm(a, m.phi - n.phi) - tail));
    }
    const auto r = suite(Suite::embedding, 100, 1007, "diag-seeded-2");
    const bool ok = increasing && brackets && w.tail_bound(100) < 0.01 && e.n == 100 && worst <= 1e-12 && r.pass();
    return {ok, fmt("N=%zu, tail_bound(100)=%.6f, phi_N(a)=%.12f vs pi^2/6=%.12f, partial values increasing=%s, max Cauchy modulus error %.2e; random weights %d/100%s",
                    e.n, w.tail_bound(100), e.partial_values.back(), basel, increasing ? "yes" : "no", worst, r.passed,
                    first_failure(r).c_str())};
}

Outcome regular_decomposition_check()
{
    const auto r = suite(Suite::decomposition, 100, 1008, "diag-seeded-3", [](SuiteConfig& c) { c.horizon = 20; });
    Stats min_ev, ratio;
    for (const auto& t : r.records)
    {
        min_ev.add(t.values.at("min_eigenvalue"));
        ratio.add(t.values.at("error") / t.values.at("error_bound"));
    }
    const auto a = UnboundedBlockOperator::linear();
    const auto phi = SparseFunctional::scalar({{1, 1.0}, {2, -1.0}});
    const auto d = regular_decomposition(a, {[&](std::size_t) { return phi; }, [](std::size_t) { return 0.0; }}, 20);
    const auto exact = [](const SparseFunctional& f, const std::map<std::size_t, double>& want) {
        for (const auto& [n, k] : f.blocks())
        {
            const auto it = want.find(n);
            if (std::abs(k(0, 0) - Complex(it == want.end() ? 0.0 : it->second, 0.0)) > 1e-15) return false;
        }
        for (const auto& [n, x] : want)
            if (!f.blocks().count(n)) return false;
        return true;
    };
    const bool fixture = exact(d.plus, {{1, 1.0}}) && exact(d.minus, {{2, 1.0}}) &&
                         std::abs(unbounded_a_norm(a, d.plus) - 1.0) <= 1e-15 &&
                         std::abs(unbounded_a_norm(a, d.minus) - 2.0) <= 1e-15;
    return {r.pass() && fixture,
            fmt("%d/100 sequences, min eigenvalue of parts %.2e, max error/bound %.2e; constant fixture split %s%s", r.passed,
                min_ev.min, ratio.max, fixture ? "exact" : "WRONG", first_failure(r).c_str())};
}

Outcome semifinite()
{
    const auto r = suite(Suite::semifinite, 200, 1009, "inj-rand8");
    Stats diff;
    for (const auto& t : r.records) diff.add(t.values.at("difference"));
    return {r.pass(), fmt("%d/200 instances, max |closed - block trace formula| %.2e (limit 1e-10)%s", r.passed, diff.max,
                          first_failure(r).c_str())};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"norm vs injectivity", norm_injectivity},
        {"duality", duality},
        {"positivity identity", positivity},
        {"center battery", center_battery},
        {"regularization convergence", regularization},
        {"weight embedding", weight_embedding},
        {"regular decomposition", regular_decomposition_check},
        {"trace formula", semifinite},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Outcome o{false, ""};
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %zu %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
