#pragma once

#include "toeplab/dynamo.hpp"
#include "toeplab/perturb.hpp"
#include "toeplab/symbol.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace toeplab::cli {

struct Entry {
    std::string value;
    std::size_t line = 0;  // 0 for defaults and preset-supplied values
};

// Raw `key = value` lines in file order.
struct RawManifest {
    std::vector<std::pair<std::string, Entry>> entries;
    const Entry* find(const std::string& key) const;
};

RawManifest parse_manifest(const std::string& text);

struct RankOne {
    double beta = 0.0;
    long index = 0;  // 0-based basis index on the half-line
};

struct Config {
    std::vector<std::string> experiments;
    std::string preset = "none";
    Symbol f;
    Symbol g;                     // conjugate-operator symbol
    bool g_is_derivative = true;  // g = f' (or grad f on a lattice)
    bool has_factor = false;
    Symbol factor;                // product: H = Re(T_f T_factor)
    Space space = Space::half_line(256);
    Boundary boundary = Boundary::Truncate;
    std::vector<SequenceSpec> potential;
    std::vector<RankOne> rank1;
    Interval interval{-1.0, 1.0};
    std::vector<int> ladder;
    std::vector<double> times;
    FitWindow fit_window;
    std::vector<double> etas;
    double lambda = 0.0;
    std::vector<Condition> admissibility;
    double window_a = 1.0, window_b = 2.0;
    double r_max = 1e4;
    double interior_fraction = 0.5;
    long seed_index = 0;
    double s = 1.0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output = "out";
    double guard_tail = 1e-6;

    // canonical `key = value` echo, defaults included
    std::vector<std::pair<std::string, std::string>> resolved;
};

struct Overrides {
    std::string output;
    int threads = 0;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

// Applies defaults, expands `preset`, validates and types every key; throws ManifestError.
Config resolve(const RawManifest& raw, const Overrides& ov = {});
std::string render_resolved(const Config& c);

Symbol parse_symbol(const std::string& text);
std::vector<std::string> preset_names();
// Manifest text for a preset; throws ManifestError listing the available names.
std::string preset_manifest(const std::string& name);

}  // namespace toeplab::cli
