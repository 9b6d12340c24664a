// opl1: instance generation, suite runs, report conversion
//
//   opl1 gen    --profile P --seed S --out F [--index I]
//   opl1 run    --suite Q [--config F.json] [--item X] [--trials N] [--seed S] [--out F] [--threads T]
//   opl1 report --in F --format json|csv [--out F]
//
// exit codes: 0 pass, 1 assertion failure, 2 usage or config error, 3 I/O error

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "opl1/opl1.hpp"

namespace
{

enum Exit
{
    ok = 0,
    failed = 1,
    usage = 2,
    io_failure = 3
};

using opl1::io::json;

int cmd_gen(const std::string& profile, std::uint64_t seed, std::uint64_t index, const std::string& out)
{
    const auto inst = opl1::gen_instance(profile, seed, index);
    opl1::io::write_json(out, opl1::io::to_json(inst));
    std::cout << "wrote " << out << " (" << profile << ", digest " << inst.digest << ")\n";
    return ok;
}

struct RunArgs
{
    std::string suite;
    std::string config;
    std::optional<std::string> item;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

int cmd_run(const RunArgs& a)
{
    json j = a.config.empty() ? json::object() : opl1::io::read_json(a.config);
    if (!j.is_object()) throw opl1::invalid_input("config: expected an object");
    if (j.contains("suite") && j.at("suite") != a.suite)
        throw opl1::invalid_input("config suite '" + j.at("suite").get<std::string>() + "' differs from --suite " + a.suite);
    j["suite"] = a.suite;
    if (a.item) j["item"] = *a.item;
    if (a.trials) j["trials"] = *a.trials;
    if (a.seed) j["seed"] = *a.seed;
    if (a.out) j["output"] = *a.out;
    if (a.threads) j["threads"] = *a.threads;
    const auto cfg = opl1::harness::config_from_json(j);

    const auto rep = opl1::harness::run_suite(cfg);
    const json report = opl1::harness::to_json(rep);
    if (!cfg.output.empty()) opl1::io::write_json(cfg.output, report);

    std::cout << opl1::harness::to_string(cfg.suite) << ": " << rep.passed << "/" << rep.records.size() << " passed\n";
    int shown = 0;
    for (const auto& r : rep.records)
        if (!r.pass && shown++ < 10) std::cout << "  trial " << r.index << " failed: " << r.note << "\n";
    return rep.pass() ? ok : failed;
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out)
{
    const json j = opl1::io::read_json(in);
    const auto errs = opl1::harness::validate_report(j);
    if (!errs.empty())
    {
        for (const auto& e : errs) std::cerr << "schema: " << e << "\n";
        return usage;
    }
    const std::string text = format == "csv" ? opl1::harness::report_to_csv(j) : j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        opl1::io::write_text(out, text);
    return j.at("summary").at("pass").get<bool>() ? ok : failed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"opl1: a-norm toolkit runner"};
    app.require_subcommand(1);

    std::string profile, out;
    std::uint64_t seed = 0, index = 0;
    auto* gen = app.add_subcommand("gen", "generate one seeded instance");
    gen->add_option("--profile", profile, "instance profile, e.g. inj-2x2, central-(2,3,1), diag-linear")->required();
    gen->add_option("--seed", seed, "64-bit seed")->required();
    gen->add_option("--index", index, "instance index within the seed")->capture_default_str();
    gen->add_option("--out", out, "output JSON file")->required();

    RunArgs ra;
    auto* run = app.add_subcommand("run", "run a suite and write a JSON report");
    run->add_option("--suite", ra.suite, "oracle|faithfulness|duality|positivity|center|convergence|embedding|decomposition|semifinite")
        ->required();
    run->add_option("--config", ra.config, "suite config JSON");
    run->add_option("--item", ra.item, "center item (ii..viii or name)");
    run->add_option("--trials", ra.trials, "override the trial count");
    run->add_option("--seed", ra.seed, "override the seed");
    run->add_option("--out", ra.out, "report path");
    run->add_option("--threads", ra.threads, "worker threads, 0 for all cores");

    std::string in, format = "json", report_out;
    auto* report = app.add_subcommand("report", "validate a report and print it as JSON or CSV");
    report->add_option("--in", in, "report JSON")->required();
    report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    report->add_option("--out", report_out, "write here instead of stdout");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try
    {
        if (*gen) return cmd_gen(profile, seed, index, out);
        if (*run) return cmd_run(ra);
        return cmd_report(in, format, report_out);
    }
    catch (const opl1::io_error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return io_failure;
    }
    catch (const opl1::invalid_input& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    catch (const json::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return failed;
    }
}
