#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bragg/errors.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "report.hpp"

namespace {

constexpr const char* version = "1.0.0";

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bragg atom-gravimeter simulator"};
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int threads = 1;
    app.add_option("command", command, "Pipeline to run")
        ->required()
        ->check(CLI::IsMember(cli::subcommands()));
    app.add_option("config", config_path, "JSON config (comments allowed); defaults if omitted");
    app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--out-dir", out_dir, "Output directory (overrides the config)");
    app.add_option("--threads", threads, "Maximum parallel work units")->check(CLI::PositiveNumber);
    app.set_version_flag("--version", version);
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        cli::ExperimentConfig cfg = config_path.empty() ? cli::parse_config(cli::json::object())
                                                        : cli::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out_dir) cfg.output_dir = *out_dir;

        cli::RunOutput out = cli::run_command(command, cfg, threads);
        const cli::json echo = cli::to_json(cfg);
        out.summary["command"] = command;
        out.summary["version"] = version;
        out.summary["config"] = echo;
        out.files["resolved_config.json"] = cli::dump_json(echo);
        out.files["summary.json"] = cli::dump_json(out.summary);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.files["timing.json"] =
            cli::dump_json({{"command", command}, {"threads", threads}, {"wall_seconds", wall}});
        cli::write_files(cfg.output_dir, out.files);
        std::cout << command << ": wrote " << out.files.size() << " files to " << cfg.output_dir
                  << "\n";
        return 0;
    } catch (const bragg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const cli::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const bragg::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
