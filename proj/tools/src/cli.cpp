#include "cli.hpp"

#include "manifest.hpp"
#include "runner.hpp"

#include "toeplab/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace toeplab::cli {

namespace {

std::string read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ManifestError(0, "cannot read manifest '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"toeplab: Toeplitz and Laurent operator experiments"};
    app.require_subcommand(1);
    Overrides ov;
    std::uint64_t seed = 0;
    app.add_option("--out", ov.output, "output directory (overrides the manifest)");
    app.add_option("--threads", ov.threads, "worker threads for ladder rungs")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized probes");

    std::string manifest_path;
    auto* run_cmd = app.add_subcommand("run", "run a manifest");
    run_cmd->add_option("manifest", manifest_path, "manifest file")->required();

    std::string preset_name, emit_path;
    auto* preset_cmd = app.add_subcommand("preset", "print or emit a fully-populated preset manifest");
    preset_cmd->add_option("name", preset_name, "preset name")->required();
    preset_cmd->add_option("--emit", emit_path, "write the manifest to this path");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    ov.has_seed = seed_opt->count() > 0;
    ov.seed = seed;

    try {
        if (*preset_cmd) {
            preset_manifest(preset_name);
            const Config c = resolve(parse_manifest("preset = " + preset_name + "\nexperiment = preset\n"), ov);
            const std::string text = render_resolved(c);
            if (emit_path.empty()) {
                out << text;
            } else {
                std::ofstream f(emit_path, std::ios::binary);
                if (!f) throw Error("cannot write '" + emit_path + "'");
                f << text;
            }
            return 0;
        }
        const Config c = resolve(parse_manifest(read_manifest(manifest_path)), ov);
        run(c, out);
        return 0;
    } catch (const ManifestError& e) {
        err << "manifest error: " << e.what() << '\n';
        return 2;
    } catch (const GuardError& e) {
        err << "guard violation: " << e.what() << " (max_safe_t=" << fmt17(e.max_safe_t()) << ")\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace toeplab::cli
