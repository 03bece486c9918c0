// Command-line front end: one subcommand per experiment kind plus cache
// management. A config file fixes the experiment; --workers, --seed, and
// --out override the matching config keys so a stored config can be rerun
// under different operational settings without editing it. The subcommand
// must agree with the config's kind (a config without a kind inherits the
// subcommand's).
//
// Exit status: 0 positive verdict, 1 negative verdict, 2 inconclusive or
// aborted, 3 config error.

#include <dkt/experiment.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

int run_kind(const std::string& kind, const std::string& config_path,
             const std::string& out_path, dkt::u64 workers, bool workers_set, dkt::u64 seed,
             bool seed_set) {
    dkt::ExperimentResult res;
    try {
        if (config_path.empty()) throw dkt::config_error("--config is required");
        dkt::Json config = dkt::load_config_file(config_path);
        if (config.is_object()) {
            if (!config.contains("kind")) config["kind"] = kind;
            if (config.at("kind") != kind)
                throw dkt::config_error("config kind '" +
                                        config.at("kind").get<std::string>() +
                                        "' does not match subcommand '" + kind + "'");
            if (workers_set) config["workers"] = workers;
            if (seed_set) config["seed"] = seed;
            if (!out_path.empty()) config["output"] = out_path;
        }
        dkt::install_disk_cache();
        res = dkt::run_experiment(config);
    } catch (const dkt::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    }

    std::string target;
    if (res.document.at("config").is_object() && res.document.at("config").contains("output"))
        target = res.document.at("config").at("output").get<std::string>();
    try {
        if (!target.empty()) dkt::write_report(res, target);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (target.empty()) {
        std::cout << dkt::canonical_dump(res.document);
    } else {
        std::cout << res.verdict << "\n" << "report written to " << target << "\n";
    }
    return res.exit_status;
}

int run_cache(bool inspect, bool clear) {
    if (inspect) {
        auto entries = dkt::cache_inspect();
        std::cout << "cache directory: " << dkt::cache_directory().string() << "\n";
        for (const auto& e : entries)
            std::cout << e.kind << "  " << e.file << "  " << e.bytes << " bytes\n";
        std::cout << entries.size() << " entries\n";
        return 0;
    }
    if (clear) {
        dkt::u64 removed = dkt::cache_clear();
        std::cout << "removed " << removed << " entries from "
                  << dkt::cache_directory().string() << "\n";
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact experiments on Drinfeld F_q[t]-modules"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dkt::tool_version());

    static const std::vector<std::pair<std::string, std::string>> kinds{
        {"torsion", "check torsion point counts across places"},
        {"frobenius", "sample Frobenius matrices on torsion at good places"},
        {"image", "classify the mod-level image from Frobenius samples"},
        {"kummer-density", "compare divisibility density with an exact oracle"},
        {"division-hull", "compute the rational division hull of a submodule"},
        {"endring", "enumerate endomorphisms inside a degree window"},
        {"index-bound", "certify the three-ideal bound on the Kummer image"},
        {"isogeny-check", "verify that an isogeny's torsion map respects Frobenius"},
        {"restrict-check", "compare torsion of a module and its subring restriction"},
    };

    std::string config_path, out_path;
    dkt::u64 workers = 1, seed = 0;
    std::vector<std::pair<CLI::App*, std::string>> subs;
    for (const auto& [name, help] : kinds) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config JSON file");
        sub->add_option("--out", out_path, "write the report document to this path");
        sub->add_option("--workers", workers, "worker threads for place sweeps");
        sub->add_option("--seed", seed, "experiment seed recorded in the report");
        subs.emplace_back(sub, name);
    }

    CLI::App* cache = app.add_subcommand("cache", "inspect or clear the on-disk caches");
    cache->require_subcommand(1);
    CLI::App* cache_inspect = cache->add_subcommand("inspect", "list cached entries");
    CLI::App* cache_clear = cache->add_subcommand("clear", "remove all cached entries");

    CLI11_PARSE(app, argc, argv);

    if (cache->parsed())
        return run_cache(cache_inspect->parsed(), cache_clear->parsed());
    for (const auto& [sub, name] : subs)
        if (sub->parsed())
            return run_kind(name, config_path, out_path, workers,
                            sub->count("--workers") > 0, seed, sub->count("--seed") > 0);
    return 3;
}
