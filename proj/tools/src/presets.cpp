#include "manifest.hpp"

#include "toeplab/error.hpp"

#include <map>

namespace toeplab::cli {

namespace {

const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> table{
        {"schro-SML",
         "# half-line Schroedinger operator with a short-range, a bounded-variation and a slowly decaying term\n"
         "experiment = probe+mourre\n"
         "symbol = cos:2\n"
         "space = half-line:1024\n"
         "potential = power:2 + dyadic_steps:1 + log_power:1\n"
         "admissibility = S,M,L\n"
         "interval = -1,1\n"
         "ladder = 256,512,1024\n"},
        {"rank1",
         "# free half-line operator plus beta <e1, .> e1\n"
         "experiment = count+lap\n"
         "symbol = cos:2\n"
         "space = half-line:400\n"
         "rank1 = beta:2 vector:e1\n"
         "interval = 2.1,3\n"
         "ladder = 100,200,300,400\n"
         "lambda = 2.5\n"
         "etas = logspace:-2,-5,4\n"},
        {"product",
         "# H = Re(T_f T_g) with f = 2cos, g = 2cos + cos 2theta\n"
         "experiment = thresholds+mourre\n"
         "symbol = cos:2\n"
         "factor = cos:2,1\n"
         "space = half-line:1024\n"
         "interval = 3,5\n"
         "ladder = 256,512,1024\n"},
        {"lattice-laplacian-d1",
         "experiment = thresholds+evolve\n"
         "symbol = laplacian:1\n"
         "space = lattice:1,600\n"
         "times = linspace:0,200,401\n"
         "fit_window = 0.5,1\n"},
        {"lattice-laplacian-d2",
         "experiment = thresholds+spectrum+evolve\n"
         "symbol = laplacian:2\n"
         "space = lattice:2,20\n"
         "times = linspace:0,5,51\n"},
        {"free-toeplitz",
         "experiment = spectrum+thresholds+count+lap\n"
         "symbol = cos:2\n"
         "space = half-line:2048\n"
         "interval = -1,1\n"
         "ladder = 256,512,1024\n"
         "lambda = 0\n"
         "etas = logspace:-1,-1.5,3\n"},
    };
    return table;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : presets()) out.push_back(k);
    return out;
}

std::string preset_manifest(const std::string& name) {
    const auto it = presets().find(name);
    if (it != presets().end()) return it->second;
    std::string all;
    for (const auto& n : preset_names()) all += (all.empty() ? "" : ", ") + n;
    throw ManifestError(0, "unknown preset '" + name + "' (available: " + all + ")");
}

}  // namespace toeplab::cli
