#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "experiments.hpp"
#include "fraccaloric/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fraccaloric - killed alpha-stable paths, spectral Dirichlet heat kernels, "
                 "and boundary-limit experiments"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run a named experiment");
    std::string experiment, config_file, out_dir = "out";
    long long seed = -1, workers = 0;
    run->add_option("experiment", experiment, "experiment name")->required();
    run->add_option("--config", config_file, "key=value config file");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the seed");
    run->add_option("--workers", workers, "worker threads (default: logical cores)");
    run->allow_extras();  // remaining --key value pairs override the config

    CLI::App* list = app.add_subcommand("list", "list experiment names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& n : fc::experiment_names()) std::printf("%s\n", n.c_str());
        return 0;
    }

    try {
        fc::Config cfg;
        if (!config_file.empty()) cfg = fc::Config::from_file(config_file);
        std::vector<std::string> extras = run->remaining();
        for (size_t i = 0; i < extras.size(); ++i) {
            std::string key = extras[i];
            if (key.rfind("--", 0) != 0 || i + 1 >= extras.size())
                throw fc::ConfigError("expected --key value pairs, got: " + key);
            cfg.set(key.substr(2), extras[++i]);
        }
        if (seed >= 0) cfg.set("seed", std::to_string(seed));
#ifdef _OPENMP
        if (workers > 0) omp_set_num_threads(static_cast<int>(workers));
#endif
        fc::ExperimentResult res = fc::run_experiment(experiment, cfg, out_dir);
        for (const auto& c : res.summary["checks"]) {
            std::printf("[%s] %s = %.6g%s%s\n", c["pass"].get<bool>() ? "PASS" : "FAIL",
                        c["name"].get<std::string>().c_str(), c["value"].get<double>(),
                        c.contains("note") ? "  # " : "",
                        c.contains("note") ? c["note"].get<std::string>().c_str() : "");
        }
        std::printf("%s: %s (artifacts in %s)\n", experiment.c_str(),
                    res.pass ? "PASS" : "FAIL", out_dir.c_str());
        return res.pass ? 0 : 1;
    } catch (const fc::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const fc::Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
