// airyform: determining factors, formal monodromy, canonical models and
// formal-equivalence reports for Airy operators P_n(d) - Q_m(x).

#include <CLI11.hpp>
#include <iostream>

#include "airy/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"airyform - symbolic engine for Airy operators at the irregular singularity"};
    app.require_subcommand(1);

    airy::JobConfig cfg;
    std::string order_text, format = "text";

    auto add_common = [&](CLI::App* sub, int max_ops) {
        sub->add_option("operator", cfg.operator_texts,
                        "operator expression, e.g. \"d^2 - x\"")
            ->expected(0, max_ops);
        sub->add_option("--file", cfg.operator_files, "operator JSON file")
            ->expected(0, max_ops);
        sub->add_option("--order", order_text, "truncation override (integer or p/q)");
        sub->add_option("--precision", cfg.precision, "double | long | big:N")
            ->default_val("double");
        sub->add_option("--eps", cfg.eps, "zero tolerance")->default_val(1e-9);
        sub->add_option("--format", format, "json | text")->default_val("text");
        sub->add_flag("--strict", cfg.strict, "reject configurations outside the analyzed case");
    };

    auto* factors = app.add_subcommand("factors", "determining factors of an operator");
    add_common(factors, 1);
    auto* monodromy = app.add_subcommand("monodromy", "formal monodromy exponent and eigenvalue");
    add_common(monodromy, 1);
    auto* canonical = app.add_subcommand("canonical", "canonical model and gauge steps");
    add_common(canonical, 1);
    auto* equiv = app.add_subcommand("equiv", "formal-equivalence report for two operators");
    add_common(equiv, 2);
    auto* selftest = app.add_subcommand("selftest", "run the invariant battery");
    add_common(selftest, 0);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    using Cmd = airy::JobConfig::Command;
    if (factors->parsed()) cfg.command = Cmd::Factors;
    else if (monodromy->parsed()) cfg.command = Cmd::Monodromy;
    else if (canonical->parsed()) cfg.command = Cmd::Canonical;
    else if (equiv->parsed()) cfg.command = Cmd::Equiv;
    else cfg.command = Cmd::Selftest;

    if (format == "json")
        cfg.json_output = true;
    else if (format != "text") {
        std::cerr << "error: --format must be json or text\n";
        return 2;
    }
    if (!order_text.empty()) {
        try {
            cfg.order = airy::Rational::parse(order_text);
        } catch (const airy::Error&) {
            std::cerr << "error: cannot parse --order '" << order_text << "'\n";
            return 2;
        }
    }

    return airy::run(cfg, std::cout, std::cerr);
}
