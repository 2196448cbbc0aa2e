#include "manifest.hpp"

#include "toeplab/error.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace toeplab::cli {

namespace {

const std::vector<std::pair<std::string, std::string>> kDefaults{
    {"experiment", ""},
    {"preset", "none"},
    {"symbol", "cos:2"},
    {"g", "fprime"},
    {"factor", "none"},
    {"space", "half-line:256"},
    {"boundary", "truncate"},
    {"potential", "none"},
    {"rank1", "none"},
    {"interval", "-1,1"},
    {"ladder", "256,512,1024"},
    {"times", "linspace:0,100,201"},
    {"fit_window", "0.5,1"},
    {"etas", "logspace:-1,-2,3"},
    {"lambda", "0"},
    {"admissibility", "none"},
    {"window", "1,2"},
    {"r_max", "10000"},
    {"interior_fraction", "0.5"},
    {"seed_vector", "auto"},
    {"s", "1"},
    {"seed", "0"},
    {"threads", "1"},
    {"output", "out"},
    {"guard_tail", "1e-6"},
};

const std::vector<std::string> kExperiments{"spectrum", "thresholds", "mourre", "count", "lap",
                                            "evolve",   "band-rate",  "probe",  "preset"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double to_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw Error("expected a number, got an empty value");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw Error("expected a finite number, got '" + t + "'");
    return v;
}

long to_long(const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw Error("expected an integer, got '" + t + "'");
    return v;
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> v;
    for (const auto& p : split(s, ',')) v.push_back(to_double(p));
    return v;
}

std::vector<double> parse_grid(const std::string& text, const char* kind) {
    const auto colon = text.find(':');
    if (colon != std::string::npos && text.substr(0, colon) == kind) {
        const auto p = to_doubles(text.substr(colon + 1));
        if (p.size() != 3) throw Error(std::string(kind) + " needs a,b,n");
        const long n = std::lround(p[2]);
        if (n < 1 || double(n) != p[2]) throw Error(std::string(kind) + " count must be a positive integer");
        auto v = linspace(p[0], p[1], static_cast<int>(n));
        if (std::string(kind) == "logspace")
            for (double& x : v) x = std::pow(10.0, x);
        return v;
    }
    return to_doubles(text);
}

Space parse_space(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error("space must be half-line:N or lattice:d,N");
    const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
    if (kind == "half-line") {
        const long N = to_long(rest);
        if (N < 1) throw Error("half-line size must be >= 1");
        return Space::half_line(static_cast<int>(N));
    }
    if (kind == "lattice") {
        const auto p = split(rest, ',');
        if (p.size() != 2) throw Error("lattice space needs d,N");
        const long d = to_long(p[0]), N = to_long(p[1]);
        if (d < 1 || d > 3 || N < 1) throw Error("lattice needs 1 <= d <= 3 and N >= 1");
        return Space::lattice(static_cast<int>(d), static_cast<int>(N));
    }
    throw Error("unknown space kind '" + kind + "'");
}

std::vector<RankOne> parse_rank1(const std::string& text, const Space& sp) {
    std::vector<RankOne> out;
    if (text == "none") return out;
    for (const auto& term : split(text, ';')) {
        RankOne r;
        bool have_beta = false, have_vec = false;
        std::istringstream in(term);
        std::string tok;
        while (in >> tok) {
            if (tok.rfind("beta:", 0) == 0) {
                r.beta = to_double(tok.substr(5));
                have_beta = true;
            } else if (tok.rfind("vector:e", 0) == 0) {
                const long n = to_long(tok.substr(8));
                if (n < 1 || n > sp.N) throw Error("rank1 vector index outside 1.." + std::to_string(sp.N));
                r.index = n - 1;
                have_vec = true;
            } else {
                throw Error("unknown rank1 token '" + tok + "'");
            }
        }
        if (!have_beta || !have_vec) throw Error("rank1 needs beta:<b> vector:e<n>");
        out.push_back(r);
    }
    if (!out.empty() && !sp.is_half_line()) throw Error("rank1 perturbations act on the half-line");
    return out;
}

long parse_seed_vector(const std::string& text, const Space& sp) {
    if (text == "auto") return sp.is_half_line() ? 0 : sp.index_of(std::vector<int>(sp.d, 0));
    if (text == "origin") {
        if (sp.is_half_line()) throw Error("origin seed needs a lattice space");
        return sp.index_of(std::vector<int>(sp.d, 0));
    }
    if (text.rfind("site:", 0) == 0) {
        if (sp.is_half_line()) throw Error("site seed needs a lattice space");
        std::vector<int> a;
        for (const auto& p : split(text.substr(5), ',')) a.push_back(static_cast<int>(to_long(p)));
        if (static_cast<int>(a.size()) != sp.d) throw Error("site seed needs d coordinates");
        for (int x : a)
            if (std::abs(x) > sp.N) throw Error("site seed outside the box");
        return sp.index_of(a);
    }
    if (text.size() > 1 && text[0] == 'e') {
        if (!sp.is_half_line()) throw Error("e<n> seed needs the half-line; use origin or site:...");
        const long n = to_long(text.substr(1));
        if (n < 1 || n > sp.N) throw Error("seed vector index outside 1.." + std::to_string(sp.N));
        return n - 1;
    }
    throw Error("seed_vector must be auto, e<n>, origin or site:a,b,...");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const Entry* RawManifest::find(const std::string& key) const {
    for (const auto& [k, e] : entries)
        if (k == key) return &e;
    return nullptr;
}

RawManifest parse_manifest(const std::string& text) {
    RawManifest m;
    std::istringstream in(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ManifestError(no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw ManifestError(no, "missing key");
        const bool known = std::any_of(kDefaults.begin(), kDefaults.end(), [&](const auto& d) { return d.first == key; });
        if (!known) throw ManifestError(no, "unknown key '" + key + "'");
        if (m.find(key)) throw ManifestError(no, "duplicate key '" + key + "'");
        if (value.empty()) throw ManifestError(no, "empty value for '" + key + "'");
        m.entries.push_back({key, Entry{value, no}});
    }
    return m;
}

Symbol parse_symbol(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error("symbol must be cos:..., laplacian:d, coeffs:... or file:path");
    const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
    if (kind == "cos") {
        // sum_k a_k cos(k theta)
        std::vector<std::pair<MultiIndex, cplx>> e;
        const auto a = to_doubles(rest);
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] == 0.0) continue;
            e.push_back({{int(k + 1)}, 0.5 * a[k]});
            e.push_back({{-int(k + 1)}, 0.5 * a[k]});
        }
        return Symbol::from_coefficients(e, 1);
    }
    if (kind == "laplacian") {
        const long d = to_long(rest);
        if (d < 1 || d > 3) throw Error("laplacian dimension must be 1..3");
        std::vector<std::pair<MultiIndex, cplx>> e;
        for (int j = 0; j < d; ++j)
            for (int s : {-1, 1}) {
                MultiIndex al(d, 0);
                al[j] = s;
                e.push_back({al, 1.0});
            }
        return Symbol::from_coefficients(e, static_cast<int>(d));
    }
    if (kind == "coeffs") {
        std::vector<std::pair<MultiIndex, cplx>> e;
        int dim = 0;
        for (const auto& term : split(rest, ';')) {
            const auto eq = term.find('=');
            if (eq == std::string::npos) throw Error("coefficient term must be alpha=value");
            MultiIndex al;
            for (const auto& p : split(term.substr(0, eq), ',')) al.push_back(static_cast<int>(to_long(p)));
            if (dim == 0) dim = static_cast<int>(al.size());
            if (static_cast<int>(al.size()) != dim) throw Error("coefficient indices differ in dimension");
            const auto v = split(term.substr(eq + 1), ':');
            if (v.size() > 2) throw Error("coefficient value must be re or re:im");
            e.push_back({al, cplx(to_double(v[0]), v.size() == 2 ? to_double(v[1]) : 0.0)});
        }
        if (dim == 0) throw Error("coeffs needs at least one term");
        return Symbol::from_coefficients(e, dim);
    }
    if (kind == "file") return from_text(read_file(rest));
    throw Error("unknown symbol kind '" + kind + "'");
}

Config resolve(const RawManifest& user, const Overrides& ov) {
    // preset values act as defaults under the user's own lines
    RawManifest raw = user;
    std::string preset = "none";
    if (const Entry* p = user.find("preset"); p && p->value != "none") {
        preset = p->value;
        RawManifest pre;
        try {
            pre = parse_manifest(preset_manifest(preset));
        } catch (const ManifestError& e) {
            throw ManifestError(p->line, e.what());
        }
        for (auto [k, e] : pre.entries) {
            if (k == "preset") continue;
            const Entry* mine = user.find(k);
            if (k == "experiment" && mine && (mine->value == "preset")) mine = nullptr;
            if (!mine) {
                e.line = 0;
                std::erase_if(raw.entries, [&](const auto& x) { return x.first == k; });
                raw.entries.push_back({k, e});
            }
        }
    }

    std::map<std::string, Entry> v;
    for (const auto& [k, d] : kDefaults) v[k] = Entry{d, 0};
    for (const auto& [k, e] : raw.entries) v[k] = e;

    Config c;
    c.preset = preset;
    auto field = [&](const std::string& key, const std::function<void(const std::string&)>& fn) {
        const Entry& e = v.at(key);
        try {
            fn(e.value);
        } catch (const ManifestError&) {
            throw;
        } catch (const std::exception& ex) {
            throw ManifestError(e.line, key + ": " + ex.what());
        }
    };

    field("experiment", [&](const std::string& s) {
        if (s.empty()) throw Error("missing required key");
        for (const auto& x : split(s, '+')) {
            if (std::find(kExperiments.begin(), kExperiments.end(), x) == kExperiments.end()) {
                std::string all;
                for (const auto& n : kExperiments) all += (all.empty() ? "" : ", ") + n;
                throw Error("unknown experiment '" + x + "' (available: " + all + ")");
            }
            if (x == "preset") throw Error("experiment = preset needs a preset key");
            c.experiments.push_back(x);
        }
    });
    field("space", [&](const std::string& s) { c.space = parse_space(s); });
    field("symbol", [&](const std::string& s) {
        c.f = parse_symbol(s);
        if (!c.f.is_real()) throw Error("symbol must be real-valued");
        if (c.f.dim() != c.space.d) throw Error("symbol dimension does not match the space");
    });
    field("g", [&](const std::string& s) {
        c.g_is_derivative = s == "fprime";
        if (!c.g_is_derivative) {
            c.g = parse_symbol(s);
            if (!c.g.is_real()) throw Error("g must be real-valued");
            if (c.g.dim() != 1 || !c.space.is_half_line()) throw Error("a custom g is supported on the half-line only");
        } else if (c.space.is_half_line()) {
            c.g = derivative(c.f);
        }
    });
    field("factor", [&](const std::string& s) {
        c.has_factor = s != "none";
        if (c.has_factor) {
            c.factor = parse_symbol(s);
            if (!c.factor.is_real() || c.factor.dim() != 1) throw Error("factor must be a real 1-d symbol");
            if (!c.space.is_half_line()) throw Error("factor products live on the half-line");
            if (!c.g_is_derivative) throw Error("factor products use g = fprime of the product symbol");
            c.g = derivative(multiply(c.f, c.factor));
        }
    });
    field("boundary", [&](const std::string& s) {
        if (s == "truncate") c.boundary = Boundary::Truncate;
        else if (s == "periodic") c.boundary = Boundary::Periodic;
        else throw Error("boundary must be truncate or periodic");
        if (c.boundary == Boundary::Periodic && c.space.is_half_line()) throw Error("periodic boundary needs a lattice");
    });
    field("potential", [&](const std::string& s) {
        if (s == "none") return;
        for (const auto& t : split(s, '+')) c.potential.push_back(SequenceSpec::parse(t));
    });
    field("rank1", [&](const std::string& s) { c.rank1 = parse_rank1(s, c.space); });
    field("interval", [&](const std::string& s) {
        const auto p = to_doubles(s);
        if (p.size() != 2 || p[0] > p[1]) throw Error("interval needs lo,hi with lo <= hi");
        c.interval = {p[0], p[1]};
    });
    field("ladder", [&](const std::string& s) {
        for (const auto& p : split(s, ',')) {
            const long n = to_long(p);
            if (n < 1) throw Error("ladder sizes must be positive");
            if (!c.ladder.empty() && n <= c.ladder.back()) throw Error("ladder must be strictly increasing");
            c.ladder.push_back(static_cast<int>(n));
        }
    });
    field("times", [&](const std::string& s) {
        c.times = parse_grid(s, "linspace");
        for (std::size_t i = 1; i < c.times.size(); ++i)
            if (c.times[i] < c.times[i - 1]) throw Error("time list not ascending");
    });
    field("fit_window", [&](const std::string& s) {
        const auto p = to_doubles(s);
        if (p.size() != 2 || !(p[0] >= 0 && p[0] < p[1] && p[1] <= 1)) throw Error("fit_window needs 0 <= lo < hi <= 1");
        c.fit_window = {p[0], p[1]};
    });
    field("etas", [&](const std::string& s) {
        c.etas = parse_grid(s, "logspace");
        for (double e : c.etas)
            if (!(e > 0)) throw Error("etas must be positive");
    });
    field("lambda", [&](const std::string& s) { c.lambda = to_double(s); });
    field("admissibility", [&](const std::string& s) {
        if (s == "none") return;
        for (const auto& p : split(s, ',')) c.admissibility.push_back(parse_condition(p));
        std::size_t seq = 0;
        for (auto cond : c.admissibility) seq += cond != Condition::Gsah;
        if (seq != 0 && seq != c.potential.size())
            throw Error("admissibility lists " + std::to_string(seq) + " sequence conditions for " +
                        std::to_string(c.potential.size()) + " potential terms");
    });
    field("window", [&](const std::string& s) {
        const auto p = to_doubles(s);
        if (p.size() != 2 || !(p[0] > 0 && p[0] < p[1])) throw Error("window needs 0 < a < b");
        c.window_a = p[0];
        c.window_b = p[1];
    });
    field("r_max", [&](const std::string& s) {
        c.r_max = to_double(s);
        if (!(c.r_max > 1)) throw Error("r_max must exceed 1");
    });
    field("interior_fraction", [&](const std::string& s) {
        c.interior_fraction = to_double(s);
        if (!(c.interior_fraction > 0 && c.interior_fraction <= 1)) throw Error("interior_fraction must be in (0, 1]");
    });
    field("seed_vector", [&](const std::string& s) { c.seed_index = parse_seed_vector(s, c.space); });
    field("s", [&](const std::string& s) {
        c.s = to_double(s);
        if (!(c.s >= 0 && c.s < 2)) throw Error("s must satisfy 0 <= s < 2");
    });
    field("seed", [&](const std::string& s) {
        const std::string t = trim(s);
        char* end = nullptr;
        errno = 0;
        const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
        if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
            throw Error("seed must be an unsigned 64-bit integer");
        c.seed = x;
    });
    field("threads", [&](const std::string& s) {
        const long t = to_long(s);
        if (t < 1) throw Error("threads must be >= 1");
        c.threads = static_cast<int>(t);
    });
    field("output", [&](const std::string& s) { c.output = s; });
    field("guard_tail", [&](const std::string& s) {
        c.guard_tail = to_double(s);
        if (!(c.guard_tail > 0 && c.guard_tail < 1)) throw Error("guard_tail must be in (0, 1)");
    });

    if (!ov.output.empty()) v["output"].value = c.output = ov.output;
    if (ov.threads > 0) v["threads"].value = std::to_string(c.threads = ov.threads);
    if (ov.has_seed) v["seed"].value = std::to_string(c.seed = ov.seed);
    v["preset"].value = preset;
    {
        std::string e;
        for (const auto& x : c.experiments) e += (e.empty() ? "" : "+") + x;
        v["experiment"].value = e;
    }
    if (v["seed_vector"].value == "auto") {
        if (c.space.is_half_line()) {
            v["seed_vector"].value = "e" + std::to_string(c.seed_index + 1);
        } else {
            v["seed_vector"].value = "origin";
        }
    }
    for (const auto& [k, d] : kDefaults) c.resolved.push_back({k, v[k].value});
    return c;
}

std::string render_resolved(const Config& c) {
    std::string out;
    for (const auto& [k, val] : c.resolved) out += k + " = " + val + "\n";
    return out;
}

}  // namespace toeplab::cli
