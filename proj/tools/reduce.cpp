// reduce: command-line front end for the reduction pipelines.
//
//   reduce config.json [--assert-reduced] [--out DIR] [--format json,csv]
//   reduce <mode> [config.json] [--preset NAME] [...]
//
// Exit codes: 0 ok, 1 not reduced under --assert-reduced, 2 invalid config, 3 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qcr/runner.hpp"

namespace {

struct Common {
    bool assert_reduced = false;
    std::string out;
    std::vector<std::string> formats;
};

void add_common(CLI::App* app, Common& c) {
    app->add_flag("--assert-reduced", c.assert_reduced, "exit 1 unless the verdict is reduced");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--format", c.formats, "output formats (json, csv)")->delimiter(',')->check(CLI::IsMember({"json", "csv"}));
}

qcr::RunOptions options_from(const Common& c) {
    qcr::RunOptions o;
    o.assert_reduced = c.assert_reduced;
    if (!c.out.empty()) o.out_dir = c.out;
    if (!c.formats.empty()) o.formats = c.formats;
    return o;
}

int finish(const qcr::RunOutput& r) {
    if (r.exit_code >= 2) {
        std::cerr << r.report.dump(2) << '\n';
        return r.exit_code;
    }
    const qcr::json& res = r.report["result"];
    std::cout << r.report["mode"].get<std::string>();
    if (res.contains("verdict")) std::cout << ": " << res["verdict"].get<std::string>();
    else if (res.contains("label")) std::cout << ": " << res["label"].get<std::string>();
    std::cout << " (config " << r.report["config_hash"].get<std::string>() << ")\n";
    for (const auto& p : r.written) std::cout << "  wrote " << p << '\n';
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical/quantum reduction test harness"};
    app.set_version_flag("--version", qcr::tool_version());

    std::string config_path;
    Common top;
    app.add_option("config", config_path, "JSON configuration file");
    add_common(&app, top);

    struct Sub {
        CLI::App* app;
        std::string config;
        std::string preset;
        Common common;
    };
    std::vector<std::unique_ptr<Sub>> subs;
    for (const auto& mode : qcr::mode_names()) {
        auto s = std::make_unique<Sub>();
        s->app = app.add_subcommand(mode, "run mode " + mode);
        s->app->add_option("config", s->config, "JSON configuration file (optional)");
        s->app->add_option("--preset", s->preset, "built-in system")->check(CLI::IsMember(qcr::preset_names()));
        add_common(s->app, s->common);
        subs.push_back(std::move(s));
    }
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (const auto& s : subs) {
        if (!s->app->parsed()) continue;
        qcr::json cfg = qcr::json::object();
        if (!s->config.empty()) {
            std::ifstream in(s->config);
            if (!in) {
                std::cerr << "cannot read " << s->config << '\n';
                return 2;
            }
            try {
                cfg = qcr::json::parse(in);
            } catch (const qcr::json::exception& e) {
                std::cerr << "invalid JSON: " << e.what() << '\n';
                return 2;
            }
        }
        if (!cfg.is_object()) {
            std::cerr << "config must be a JSON object\n";
            return 2;
        }
        cfg["mode"] = s->app->get_name();
        if (!s->preset.empty()) cfg["preset"] = s->preset;
        return finish(qcr::run_config(cfg, options_from(s->common)));
    }

    if (config_path.empty()) {
        std::cerr << app.help();
        return 2;
    }
    return finish(qcr::run_file(config_path, options_from(top)));
}
