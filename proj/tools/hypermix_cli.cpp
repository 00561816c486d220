// hypermix: batch runner for the operator-dynamics experiments.
//
//   hypermix <subcommand> --config cfg.json [--seed N] [--out dir] [--arith float|rational]
//
// Exit status: 0 success, 2 inconclusive, 1 error.

#include "runner.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    using namespace hypermix;
    CLI::App app{"hypermix experiment runner"};
    std::string subcommand, config_path, out_dir = "out", arith;
    std::uint64_t seed = 0;
    app.add_option("subcommand", subcommand, "steer | tensor-steer | group-build | mix-cert | orbit-coverage | gallery | lp-demo");
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--out", out_dir, "output directory");
    auto* arith_opt = app.add_option("--arith", arith, "float or rational")->check(CLI::IsMember({"float", "rational"}));
    CLI11_PARSE(app, argc, argv);

    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            try {
                doc = nlohmann::json::parse(f);
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError("", std::string("config is not valid JSON: ") + e.what());
            }
        }
        cli::Overrides ov;
        if (!subcommand.empty()) ov.subcommand = subcommand;
        if (*seed_opt) ov.seed = seed;
        if (*arith_opt) ov.arith = arith;
        const auto cfg = cli::validate_config(doc, ov);

        const auto started = utc_now();
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = cli::run(cfg);
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const nlohmann::json meta{{"started_utc", started},
                                  {"elapsed_ms", ms},
                                  {"workers", worker_count()},
                                  {"config", config_path}};
        cli::write_artifacts(result, cfg, out_dir, meta);
        if (result.exit_code == 2) std::cerr << "inconclusive: " << result.report.value("inconclusive", "") << '\n';
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
