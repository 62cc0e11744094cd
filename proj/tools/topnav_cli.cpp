// topnav_cli.cpp - command-line front end.
//
//   topnav gen    --seed S --out FILE            generate a navigation cell
//   topnav scene  --name NAME --seed S --out F   scripted scene worlds
//   topnav run    --world FILE --variant NAME --log F.jsonl [--dump-layers D]
//   topnav batch  --worlds N --episodes M --variants LIST --seed S --csv F
//
// Exit codes: 0 success, 2 usage/config error, 3 episode abort.
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "topnav/config.hpp"
#include "topnav/harness.hpp"
#include "topnav/world_io.hpp"

namespace {

topnav::AppConfig load_config(const std::string& path) {
    if (path.empty()) return topnav::AppConfig{};
    return topnav::load_config_file(path);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(s);
    while (std::getline(in, token, ','))
        if (!token.empty()) out.push_back(token);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TOP-Nav costmap navigation benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "harness config file")->capture_default_str();

    auto* gen = app.add_subcommand("gen", "generate a random navigation cell");
    uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "world seed")->required();
    gen->add_option("--out", gen_out, "output world file")->required();

    auto* scene = app.add_subcommand("scene", "generate a scripted scene world");
    std::string scene_name, scene_out;
    uint64_t scene_seed = 0;
    scene->add_option("--name", scene_name, "glass-wall | novel-terrain | slippery-strip")
        ->required();
    scene->add_option("--seed", scene_seed, "scene seed")->required();
    scene->add_option("--out", scene_out, "output world file")->required();

    auto* run = app.add_subcommand("run", "run one episode on a world file");
    std::string run_world, run_variant = "TOP", run_log, run_dump;
    uint64_t run_seed = 0;
    bool run_seed_set = false;
    run->add_option("--world", run_world, "world file")->required();
    run->add_option("--variant", run_variant, "variant preset")->capture_default_str();
    run->add_option("--log", run_log, "JSONL step log output")->required();
    run->add_option("--dump-layers", run_dump, "directory for per-plan costmap dumps");
    run->add_option("--seed", run_seed, "episode seed (defaults to the world seed)")
        ->each([&](const std::string&) { run_seed_set = true; });

    auto* batch = app.add_subcommand("batch", "run a seeded benchmark batch");
    int batch_worlds = 0, batch_episodes = 0, batch_workers = 0;
    uint64_t batch_seed = 0;
    std::string batch_variants = "TOP,wo-Terrain,wo-Proprioception,Obstacle-Only";
    std::string batch_csv_path;
    batch->add_option("--worlds", batch_worlds, "number of generated worlds")->required();
    batch->add_option("--episodes", batch_episodes, "episodes per world per variant")->required();
    batch->add_option("--variants", batch_variants, "comma-separated variant presets")
        ->capture_default_str();
    batch->add_option("--seed", batch_seed, "base seed")->required();
    batch->add_option("--csv", batch_csv_path, "summary CSV output")->required();
    batch->add_option("--workers", batch_workers, "worker threads (0 = hardware)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        const topnav::AppConfig cfg = load_config(config_path);

        if (*gen) {
            const topnav::WorldModel w = topnav::generate_world(gen_seed);
            topnav::save_world_file(w, gen_out);
            std::cout << "wrote " << gen_out << "\n";
            return 0;
        }
        if (*scene) {
            const topnav::WorldModel w = topnav::scripted_scene(scene_name, scene_seed);
            topnav::save_world_file(w, scene_out);
            std::cout << "wrote " << scene_out << "\n";
            return 0;
        }
        if (*run) {
            const topnav::WorldModel w = topnav::load_world_file(run_world);
            const topnav::VariantFlags variant = topnav::variant_preset(run_variant);
            const uint64_t seed = run_seed_set ? run_seed : w.seed;
            topnav::EpisodeTrace trace;
            trace.want_layers = !run_dump.empty();
            const topnav::EpisodeResult r = topnav::run_episode(w, variant, cfg, seed, &trace);
            topnav::export_step_log(trace.records, run_log);
            if (!run_dump.empty()) topnav::export_layer_dumps(trace.plans, run_dump);
            std::cout << "variant=" << r.variant << " success=" << (r.success ? 1 : 0)
                      << " time_s=" << topnav::fmt_double(r.time_s)
                      << " td=" << topnav::fmt_double(r.td_percent)
                      << " vft=" << topnav::fmt_double(r.vft_percent)
                      << " ut_proxy=" << topnav::fmt_double(r.ut_proxy_percent)
                      << " collisions=" << r.collisions << "\n";
            return 0;
        }
        if (*batch) {
            std::vector<topnav::VariantFlags> variants;
            for (const std::string& name : split_list(batch_variants))
                variants.push_back(topnav::variant_preset(name));
            const int workers = batch_workers > 0
                                    ? batch_workers
                                    : static_cast<int>(std::thread::hardware_concurrency());
            const topnav::BatchSummary summary = topnav::run_batch(
                batch_worlds, batch_episodes, variants, batch_seed, std::max(1, workers), cfg);
            topnav::export_batch_csv(summary, batch_csv_path);
            std::cout << topnav::batch_csv(summary);
            return 0;
        }
    } catch (const topnav::EpisodeAborted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
