// Command-line harness: collect planning experience, train action samplers,
// evaluate them, verify the distribution-shift bounds numerically, and run
// the illustrative mixture pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 runtime
// failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gandi/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;
constexpr int kExitRuntime = 3;

struct CliOptions {
    std::string verb;
    std::string config_path;
    std::string domain;
    std::string method;
    std::string out_dir;
    std::uint64_t seed = 1;
};

int run(const CliOptions& opt) {
    const auto cfg = gandi::make_experiment_config(opt.config_path, opt.domain, opt.method,
                                                   opt.out_dir, opt.seed);
    if (opt.verb == "collect") {
        gandi::cmd_collect(cfg);
    } else if (opt.verb == "train") {
        gandi::cmd_train(cfg);
    } else if (opt.verb == "eval") {
        gandi::cmd_eval(cfg);
    } else if (opt.verb == "verify") {
        const std::size_t violations = gandi::cmd_verify(cfg);
        if (violations > 0) {
            std::cerr << "verify: " << violations << " bound violation(s); see "
                      << cfg.out_dir << "/verify_bounds.csv\n";
            return kExitVerification;
        }
        std::cout << "verify: all bounds hold\n";
    } else if (opt.verb == "toy") {
        gandi::cmd_toy(cfg);
    }
    std::cout << opt.verb << ": done (config " << gandi::hash_hex(cfg.config_hash)
              << ", outputs in " << cfg.out_dir << ")\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GANDI harness: experience collection, generative action "
                 "sampler training, evaluation, and bound verification"};
    app.require_subcommand(1);

    CliOptions opt;
    for (const char* verb : {"collect", "train", "eval", "verify", "toy"}) {
        auto* sub = app.add_subcommand(verb);
        sub->add_option("--config", opt.config_path, "key=value configuration file");
        sub->add_option("--seed", opt.seed, "master random seed");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--method", opt.method, "training method")
            ->check(CLI::IsMember({"gan", "gandi"}));
        sub->add_option("--domain", opt.domain, "problem domain")
            ->check(CLI::IsMember({"gmm", "binpack", "reconfig"}));
        sub->callback([&opt, verb] { opt.verb = verb; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    // collect/train/eval need a planning domain
    if ((opt.verb == "collect" || opt.verb == "train" || opt.verb == "eval") &&
        opt.domain == "gmm") {
        std::cerr << opt.verb << ": domain 'gmm' is only supported by the toy command\n";
        return kExitUsage;
    }

    try {
        return run(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
