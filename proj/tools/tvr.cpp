// Command-line front end: tvr <command> MODEL [options]
//
// Exit codes: 0 conclusive verdict, 10 UNKNOWN, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tvr/tvr.hpp"

namespace {

constexpr int exit_unknown = 10;
constexpr int exit_usage = 2;

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw tvr::UsageError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Options {
    std::string model_path;
    std::string from;
    std::string to;
    long long cap_norm = 64;
    long long cap_steps = 1'000'000;
    std::optional<std::size_t> const_c;
    std::string cert_path;
    bool json = false;
    std::uint64_t seed = 0;
    std::size_t states = 3;
    long long max_norm = 2;
    double test_density = 0.2;
};

int report(const tvr::Tvass& model, const Options& o, const std::string& query, const tvr::decide::Verdict& v,
           const char* yes, const char* no)
{
    const char* label = v.outcome == tvr::decide::Outcome::yes  ? yes
                        : v.outcome == tvr::decide::Outcome::no ? no
                                                                : "UNKNOWN";
    std::cout << label << "\n";
    if (o.json)
        std::cout << tvr::io::verdict_json(model, query, label, v).dump(2) << "\n";
    else if (!v.evidence.empty())
        std::cerr << v.evidence << "\n";
    return v.outcome == tvr::decide::Outcome::unknown ? exit_unknown : 0;
}

tvr::decide::BoundOptions bound_options(const Options& o)
{
    tvr::decide::BoundOptions b;
    b.cap_norm = o.cap_norm;
    b.c = o.const_c;
    return b;
}

int run_reach(const Options& o)
{
    const tvr::Tvass model = tvr::io::parse_model(read_file(o.model_path));
    tvr::decide::ReachOptions r;
    r.cap_norm = o.cap_norm;
    r.cap_steps = o.cap_steps;
    r.c = o.const_c;
    const auto v = tvr::decide::reach(model, tvr::io::parse_configuration(model, o.from),
                                      tvr::io::parse_configuration(model, o.to), r);
    return report(model, o, "reach", v, "REACHABLE", "UNREACHABLE");
}

int run_bounded(const Options& o)
{
    const tvr::Tvass model = tvr::io::parse_model(read_file(o.model_path));
    const auto v = tvr::decide::bounded(model, tvr::io::parse_configuration(model, o.from), bound_options(o));
    return report(model, o, "bounded", v, "UNBOUNDED", "BOUNDED");
}

int run_terminates(const Options& o)
{
    const tvr::Tvass model = tvr::io::parse_model(read_file(o.model_path));
    const auto v = tvr::decide::terminates(model, tvr::io::parse_configuration(model, o.from), bound_options(o));
    return report(model, o, "terminates", v, "NONTERMINATING", "TERMINATING");
}

int run_check(const Options& o)
{
    const tvr::Tvass model = tvr::io::parse_model(read_file(o.model_path));
    const auto from = tvr::io::parse_configuration(model, o.from);
    const auto to = tvr::io::parse_configuration(model, o.to);
    const auto cert = tvr::io::parse_certificate(model, read_file(o.cert_path));
    const bool ok = std::visit([&](const auto& c) { return tvr::decide::check_certificate(model, from, to, c); }, cert);
    std::cout << (ok ? "VALID" : "INVALID") << "\n";
    return 0;
}

int run_system(const Options& o)
{
    const tvr::Tvass model = tvr::io::parse_model(read_file(o.model_path));
    const auto from = tvr::io::parse_configuration(model, o.from);
    const auto to = tvr::io::parse_configuration(model, o.to);
    const auto cert = tvr::io::parse_certificate(model, read_file(o.cert_path));
    const auto* counted = std::get_if<tvr::CountedLps>(&cert);
    if (!counted)
        throw tvr::UsageError("system needs an lps certificate");
    const tvr::IneqSystem sys = tvr::build_system(model, counted->scheme, from.counters, to.counters);
    if (o.json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const tvr::IneqRow& r : sys.rows) {
            nlohmann::json coeffs = nlohmann::json::array();
            for (const tvr::Int& c : r.coeffs)
                coeffs.push_back(c.str());
            rows.push_back({{"coeffs", coeffs}, {"constant", r.constant.str()}, {"tag", r.tag.describe()}});
        }
        std::cout << nlohmann::json{{"schema", "tvr/1"}, {"variables", sys.num_vars}, {"rows", rows}}.dump(2) << "\n";
        return 0;
    }
    // one row per line: c1*n1 + ... + ck*nk >= constant
    for (const tvr::IneqRow& r : sys.rows) {
        for (std::size_t j = 0; j < r.coeffs.size(); ++j)
            std::cout << (j > 0 ? " + " : "") << r.coeffs[j] << "*n" << j + 1;
        if (r.coeffs.size() == 0)
            std::cout << '0';
        std::cout << " >= " << r.constant << "    # " << r.tag.describe() << "\n";
    }
    return 0;
}

int run_woca(const Options& o)
{
    const tvr::Tvass model = tvr::io::parse_model(read_file(o.model_path));
    const auto conv = tvr::woca::tvass_to_woca(model);
    std::cout << tvr::io::print_model(conv.woca().base());
    for (std::size_t i = 0; i < conv.woca().weights().size(); ++i)
        std::cout << "# weight " << conv.woca().base().transitions()[i].name << ' ' << conv.woca().weights()[i] << "\n";
    return 0;
}

int run_gen(const Options& o)
{
    std::cout << tvr::io::print_model(tvr::io::random_instance(o.seed, o.states, o.max_norm, o.test_density));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reachability, boundedness and termination for 2-dimensional VASS with zero-tests"};
    app.require_subcommand(1);
    Options o;

    auto model_arg = [&](CLI::App* cmd) { cmd->add_option("model", o.model_path, "model file")->required(); };
    auto caps = [&](CLI::App* cmd) {
        cmd->add_option("--cap-norm", o.cap_norm, "largest counter value explored")->check(CLI::NonNegativeNumber);
        cmd->add_option("--cap-steps", o.cap_steps, "expansion budget")->check(CLI::NonNegativeNumber);
        cmd->add_option("--const-c", o.const_c, "constant in the exponent of the completeness bound");
        cmd->add_flag("--json", o.json, "print the verdict as JSON");
    };

    auto* reach = app.add_subcommand("reach", "decide from ->* to");
    model_arg(reach);
    reach->add_option("--from", o.from, "\"STATE N1 N2\"")->required();
    reach->add_option("--to", o.to, "\"STATE N1 N2\"")->required();
    caps(reach);

    auto* bounded = app.add_subcommand("bounded", "is the reachable set finite");
    model_arg(bounded);
    bounded->add_option("--from", o.from)->required();
    caps(bounded);

    auto* terminates = app.add_subcommand("terminates", "are all runs finite");
    model_arg(terminates);
    terminates->add_option("--from", o.from)->required();
    caps(terminates);

    auto* check = app.add_subcommand("check", "validate a certificate");
    model_arg(check);
    check->add_option("--from", o.from)->required();
    check->add_option("--to", o.to)->required();
    check->add_option("--cert", o.cert_path, "certificate JSON")->required();

    auto* system = app.add_subcommand("system", "print the inequality system of a scheme");
    model_arg(system);
    system->add_option("--from", o.from)->required();
    system->add_option("--to", o.to)->required();
    system->add_option("--cert", o.cert_path, "lps certificate JSON")->required();
    system->add_flag("--json", o.json);

    auto* woca = app.add_subcommand("woca", "print the weighted one-counter conversion");
    model_arg(woca);

    auto* gen = app.add_subcommand("gen", "print a random model");
    gen->add_option("--seed", o.seed);
    gen->add_option("--states", o.states)->check(CLI::PositiveNumber);
    gen->add_option("--max-norm", o.max_norm)->check(CLI::NonNegativeNumber);
    gen->add_option("--test-density", o.test_density)->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*reach)
            return run_reach(o);
        if (*bounded)
            return run_bounded(o);
        if (*terminates)
            return run_terminates(o);
        if (*check)
            return run_check(o);
        if (*system)
            return run_system(o);
        if (*woca)
            return run_woca(o);
        return run_gen(o);
    } catch (const tvr::ParseError& e) {
        std::cerr << o.model_path << ": " << e.what() << "\n";
    } catch (const tvr::CertificateError& e) {
        std::cerr << "certificate: " << e.what() << "\n";
    } catch (const tvr::UsageError& e) {
        std::cerr << e.what() << "\n";
    } catch (const tvr::BoundTooLarge& e) {
        std::cerr << e.what() << "\n";
    }
    return exit_usage;
}
