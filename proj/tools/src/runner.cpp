#include "runner.hpp"

#include "toeplab/error.hpp"
#include "toeplab/parallel.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>

namespace toeplab::cli {

namespace fs = std::filesystem;
using Sparse = Eigen::SparseMatrix<cplx>;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string fmt10(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

class Csv {
public:
    Csv(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write '" + path.string() + "'");
        out_ << header << '\n';
    }
    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& cell : cells) {
            if (!first) out_ << ',';
            out_ << quoted(cell);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string join(const std::vector<double>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt10(std::abs(v[i]) < 1e-13 ? 0.0 : v[i]);
    return s + "}";
}

std::string anchor_for(Condition c) {
    switch (c) {
        case Condition::S: return "short-range window integral";
        case Condition::M: return "bounded-variation window integral";
        case Condition::L: return "slow-decay window integral";
        case Condition::H: return "weighted decay window integral";
        case Condition::Gsah: return "weighted operator decay integral";
    }
    return "";
}

Symbol random_partner(std::mt19937_64& rng, int bw) {
    std::normal_distribution<double> n01;
    std::vector<std::pair<MultiIndex, cplx>> e;
    e.push_back({{0}, n01(rng)});
    for (int k = 1; k <= bw; ++k) {
        const cplx c(n01(rng), n01(rng));
        e.push_back({{k}, c});
        e.push_back({{-k}, std::conj(c)});
    }
    return Symbol::from_coefficients(e, 1);
}

class Run {
public:
    Run(const Config& c, std::ostream& log) : c_(c), m_(c), h_(m_.h), log_(log), dir_(c.output) {}

    void execute() {
        fs::create_directories(dir_);
        {
            std::ofstream m(dir_ / "manifest.resolved", std::ios::binary);
            if (!m) throw Error("cannot write '" + (dir_ / "manifest.resolved").string() + "'");
            m << render_resolved(c_);
        }
        try {
            for (const auto& e : c_.experiments) {
                log_ << "[" << e << "]\n";
                if (e == "spectrum") spectrum();
                else if (e == "thresholds") thresholds_report();
                else if (e == "mourre") mourre();
                else if (e == "count") count();
                else if (e == "lap") lap();
                else if (e == "evolve") evolve();
                else if (e == "band-rate") band_rate();
                else if (e == "probe") probe();
            }
        } catch (const GuardError& g) {
            write_summary();
            throw;
        }
        write_summary();
    }

private:
    const OperatorMatrix& H() {
        if (!H_) H_ = m_.hamiltonian(c_.space.N);
        return *H_;
    }

    const SpectralData& sd() {
        if (!sd_) {
            sd_ = eigh(H());
            virial();
        }
        return *sd_;
    }

    const std::vector<double>& threshold_values() {
        if (!thresholds_) {
            crit_ = critical_set(h_);
            thresholds_ = thresholds(h_, *crit_);
        }
        return *thresholds_;
    }

    static double hermitian_norm(const Matrix& M) {
        auto apply = [&](const Vector& x) -> Vector { return M * x; };
        return lanczos_norm(apply, apply, M.rows());
    }

    // max_k |<v_k, i[A, H] v_k>| over all eigenvectors, relative to ||i[A, H]||; A and H are sparse
    void virial() {
        const Sparse A = m_.conjugate(c_.space.N).data().sparseView(), Hs = H().data().sparseView();
        const Sparse C = cplx(0.0, 1.0) * (Sparse(A * Hs) - Sparse(Hs * A));
        const Matrix CV = C * sd_->eigenvectors;
        double m = 0.0;
        for (long k = 0; k < CV.cols(); ++k) m = std::max(m, std::abs(sd_->eigenvectors.col(k).dot(CV.col(k))));
        auto apply = [&](const Vector& x) -> Vector { return C * x; };
        const double rel = m / std::max(lanczos_norm(apply, apply, C.rows()), 1e-300);
        line("virial", rel < 1e-12 ? "holds" : "failed", "virial theorem, bracket form",
             "max_rel=" + fmt10(rel) + " N=" + std::to_string(c_.space.N));
    }

    void line(const std::string& name, const std::string& verdict, const std::string& anchor, const std::string& detail) {
        std::string s = name + ": " + verdict + " (" + anchor + ")";
        if (!detail.empty()) s += " " + detail;
        summary_.push_back(s);
        log_ << s << '\n';
    }

    void write_summary() {
        std::ofstream out(dir_ / "summary.txt", std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir_ / "summary.txt").string() + "'");
        for (const auto& s : summary_) out << s << '\n';
    }

    void spectrum() {
        const auto& s = sd();
        Csv csv(dir_ / "spectrum.csv", "index,eigenvalue,leakage");
        for (long k = 0; k < s.eigenvalues.size(); ++k)
            csv.row({std::to_string(k), fmt17(s.eigenvalues[k]),
                     fmt17(boundary_leakage(s.space, s.eigenvectors.col(k)))});
        const double lo = s.eigenvalues[0], hi = s.eigenvalues[s.eigenvalues.size() - 1];
        const std::string detail = "min=" + fmt10(lo) + " max=" + fmt10(hi) + " n=" + std::to_string(s.eigenvalues.size());
        if (c_.has_factor || !c_.potential.empty() || !c_.rank1.empty()) {
            line("spectrum", "computed", "eigenvalues of the truncation", detail);
            return;
        }
        const auto& t = threshold_values();
        const double rlo = *std::min_element(t.begin(), t.end()), rhi = *std::max_element(t.begin(), t.end());
        const bool inside = lo >= rlo - 1e-10 && hi <= rhi + 1e-10;
        line("spectrum", inside ? "inside" : "outside", "spectrum within the range of the symbol",
             detail + " range=[" + fmt10(rlo) + ", " + fmt10(rhi) + "]");
    }

    void thresholds_report() {
        const auto& t = threshold_values();
        Csv csv(dir_ / "thresholds.csv", "threshold");
        for (double x : t) csv.row({fmt17(x)});
        Csv pts(dir_ / "critical_points.csv", "index,axis,theta,degenerate");
        for (std::size_t i = 0; i < crit_->points.size(); ++i)
            for (std::size_t j = 0; j < crit_->points[i].size(); ++j)
                pts.row({std::to_string(i), std::to_string(j), fmt17(crit_->points[i][j]),
                         crit_->degenerate[i] ? "1" : "0"});
        line("thresholds", join(t), "critical values of the symbol",
             std::string("exhaustive=") + (crit_->is_exhaustive ? "yes" : "no"));
    }

    MourreConstants constants() const { return mourre_constants(h_, m_.commutator_symbol(), c_.interval); }

    void mourre() {
        const auto k = constants();
        {
            Csv csv(dir_ / "mourre_constants.csv", "kind,margin,c,C");
            csv.row({"exact", "0", fmt17(k.c), fmt17(k.C)});
            csv.row({"sharp_flat", "0", fmt17(k.c_sharp), fmt17(k.C_flat)});
            for (const auto& r : k.table) csv.row({"enlarged", fmt17(r.margin), fmt17(r.c), fmt17(r.C)});
        }
        const auto& ladder = c_.ladder;
        if (std::find(ladder.begin(), ladder.end(), c_.space.N) != ladder.end()) sd();
        std::vector<MourreReport> reps(ladder.size());
        parallel_for(ladder.size(), c_.threads, [&](std::size_t i) {
            const int N = ladder[i];
            const auto C = m_.commutator(N);
            reps[i] = N == c_.space.N ? mourre_verify(*sd_, C, c_.interval, k, c_.interior_fraction)
                                      : mourre_verify(m_.hamiltonian(N), C, c_.interval, k, c_.interior_fraction);
        });
        Csv csv(dir_ / "mourre.csv",
                "n,lambda_lo,lambda_hi,c,c_sharp,lam_min_interior,lam_max_interior,leakage,n_test_vectors,tol,verdict");
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const auto& r = reps[i];
            csv.row({std::to_string(ladder[i]), fmt17(c_.interval.lo), fmt17(c_.interval.hi), fmt17(k.c),
                     fmt17(k.c_sharp), fmt17(r.lambda_min_interior), fmt17(r.lambda_max_interior),
                     fmt17(r.boundary_leakage), std::to_string(r.n_test_vectors), fmt17(r.tol), to_string(r.verdict)});
        }
        bool up = true, down = true;
        for (std::size_t i = 1; i < reps.size(); ++i) {
            up = up && reps[i].lambda_min_interior >= reps[i - 1].lambda_min_interior;
            down = down && reps[i].lambda_min_interior <= reps[i - 1].lambda_min_interior;
        }
        const auto& top = reps.back();
        std::string detail = "N=" + std::to_string(ladder.back()) + " c=" + fmt10(k.c) +
                             " lambda_min_interior=" + fmt10(top.lambda_min_interior) + " tol=" + fmt10(top.tol) +
                             " ladder=" + (up || down ? "monotone" : "non-monotone");
        if (!top.note.empty()) detail += " note=\"" + top.note + "\"";
        line("mourre", to_string(top.verdict), "Mourre estimate on interior test vectors", detail);
    }

    void count() {
        const auto rep = count_eigenvalues([this](int N) { return m_.hamiltonian(N); }, c_.interval, c_.ladder,
                                           threshold_values(), c_.threads);
        {
            Csv csv(dir_ / "count.csv", "n,count");
            for (std::size_t i = 0; i < rep.ladder.size(); ++i)
                csv.row({std::to_string(rep.ladder[i]), std::to_string(rep.counts[i])});
        }
        {
            Csv csv(dir_ / "count_eigenvalues.csv", "n,k,eigenvalue");
            for (std::size_t i = 0; i < rep.ladder.size(); ++i)
                for (std::size_t j = 0; j < rep.eigenvalues[i].size(); ++j)
                    csv.row({std::to_string(rep.ladder[i]), std::to_string(j), fmt17(rep.eigenvalues[i][j])});
        }
        std::string counts;
        for (int n : rep.counts) counts += (counts.empty() ? "" : ",") + std::to_string(n);
        std::string detail = "counts=" + counts + " eigenvalues=" + join(rep.eigenvalues.back()) +
                             " distance_to_thresholds=" + fmt10(rep.distance_to_thresholds);
        if (rep.threshold_warning) detail += " warning=\"interval meets a threshold\"";
        line("count", rep.stabilized_count ? "stabilized " + std::to_string(*rep.stabilized_count) : "not stabilized",
             "point spectrum in the interval across the ladder", detail);
    }

    void lap() {
        const auto sdA = eigh(m_.conjugate(c_.space.N));
        const auto p = lap_probe(sd(), sdA, c_.lambda, c_.etas);
        Csv csv(dir_ / "lap.csv", "eta,norm,above_floor,floor");
        int above = 0;
        for (const auto& q : p.points) {
            csv.row({fmt17(q.eta), fmt17(q.norm), q.above_floor ? "1" : "0", fmt17(p.floor)});
            above += q.above_floor;
        }
        std::string verdict = "inconclusive", detail = "lambda=" + fmt10(c_.lambda) + " floor=" + fmt10(p.floor);
        if (above >= 2) {
            const double slope = lap_slope(p), var = lap_variation_per_decade(p);
            detail += " slope=" + fmt10(slope) + " variation_per_decade=" + fmt10(var);
            if (std::abs(slope + 1.0) <= 0.05) verdict = "divergent";
            else if (var < 0.1) verdict = "bounded";
        } else {
            detail += " note=\"fewer than two eta above the floor\"";
        }
        line("lap", verdict, "weighted resolvent as eta decreases", detail);
    }

    Vector seed_vector() const {
        Vector phi = Vector::Zero(c_.space.dim());
        phi(c_.seed_index) = 1.0;
        return phi;
    }

    TraceOptions trace_options() const {
        TraceOptions opt;
        opt.window = c_.fit_window;
        opt.guard_tail = c_.guard_tail;
        return opt;
    }

    void require_truncated(const std::string& what) const {
        if (c_.boundary != Boundary::Truncate) throw Error(what + " needs boundary = truncate");
        if (c_.times.size() < 2) throw Error(what + " needs at least two times");
    }

    void write_trace(const std::string& file, const PropagationTrace& tr) {
        Csv csv(dir_ / file, "t,x_norm,cesaro,rate_running");
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            csv.row({fmt17(tr.times[i]), fmt17(tr.x_norms[i]), fmt17(tr.cesaro[i]), fmt17(tr.rate_running[i])});
    }

    void identity_line(const std::string& name, const PropagationTrace& tr) {
        line(name, tr.xnorm_identity_error < 1e-6 ? "holds" : "failed", "position-norm derivative identity",
             "rel_error=" + fmt10(tr.xnorm_identity_error) + " norm_drift=" + fmt10(tr.norm_drift) +
                 " energy_drift=" + fmt10(tr.energy_drift));
    }

    void guard_line(const std::string& name, const GuardError& g) {
        line(name, "guard violated", "light-cone and band guards", "max_safe_t=" + fmt10(g.max_safe_t()) +
                                                                       " message=\"" + g.what() + "\"");
    }

    void evolve() {
        require_truncated("evolve");
        PropagationTrace tr;
        try {
            tr = propagation_trace(h_, sd(), H(), seed_vector(), c_.times, trace_options());
        } catch (const GuardError& g) {
            guard_line("evolve", g);
            throw;
        }
        write_trace("trace.csv", tr);
        const auto& f = tr.rate_fit;
        line("evolve", "rate=" + fmt10(f.rate), "ballistic growth of the position norm",
             "stderr=" + fmt10(f.stderr_) + " early=" + fmt10(f.rate_early) + " late=" + fmt10(f.rate_late) +
                 " cesaro_final=" + fmt10(tr.cesaro.back()) + " guard_max_safe_t=" + fmt10(tr.guard.max_safe_t) +
                 (tr.renormalized ? " renormalized=yes" : ""));
        identity_line("xnorm-identity", tr);
        const double bound = std::sqrt(hermitian_norm(m_.commutator(c_.space.N).data()));
        line("rate-bound", f.rate <= bound * 1.1 ? "holds" : "failed", "commutator-norm bound on the velocity",
             "rate=" + fmt10(f.rate) + " bound=" + fmt10(bound));
    }

    void band_rate() {
        require_truncated("band-rate");
        BandRate br;
        try {
            MourreConstants k;
            try {
                k = constants();
            } catch (const GuardError&) {
                throw;
            } catch (const Error& e) {
                throw GuardError(std::string("empty band: ") + e.what());
            }
            br = band_filtered_rate(h_, sd(), H(), c_.interval, seed_vector(), c_.times, k, trace_options());
        } catch (const GuardError& g) {
            guard_line("band-rate", g);
            throw;
        }
        write_trace("band_rate.csv", br.trace);
        line("band-rate", br.inside ? "inside" : "outside", "band-filtered velocity between the Mourre constants",
             "rate=" + fmt10(br.rate) + " stderr=" + fmt10(br.rate_stderr) + " sqrt_c=" + fmt10(br.sqrt_c) +
                 " sqrt_C=" + fmt10(br.sqrt_C) + " filtered_norm=" + fmt10(br.filtered_norm));
        identity_line("xnorm-identity[band-rate]", br.trace);
    }

    void probe() {
        admissibility();
        if (c_.space.is_half_line()) identities();
    }

    void admissibility() {
        if (c_.admissibility.empty()) return;
        Csv csv(dir_ / "admissibility.csv",
                "term,condition,verdict,integral_estimate,tail_exponent,r2,r_max_used,q_value,q_stable,limit_ok,rule");
        Csv curve(dir_ / "admissibility_integrand.csv", "term,condition,r,integrand");
        std::size_t term = 0;
        for (Condition cond : c_.admissibility) {
            AdmissibilityReport rep;
            std::string name;
            if (cond == Condition::Gsah) {
                const auto V = m_.perturbation(c_.space.N);
                if (!V) throw Error("gsah probe needs a potential or rank1 perturbation");
                rep = gsah_probe(*V, c_.s, c_.window_a, c_.window_b, c_.r_max);
                name = "V";
            } else {
                const auto& spec = c_.potential.at(term++);
                rep = admissibility_check(spec, cond, c_.window_a, c_.window_b, c_.r_max);
                name = spec.describe();
            }
            const std::string cs = to_string(cond);
            csv.row({name, cs, to_string(rep.verdict), fmt17(rep.integral_estimate), fmt17(rep.tail_exponent),
                     fmt17(rep.r2), fmt17(rep.r_max_used), fmt17(rep.q_value), rep.q_stable ? "1" : "0",
                     rep.limit_ok ? "1" : "0", rep.rule});
            for (std::size_t i = 0; i < rep.r.size(); ++i) curve.row({name, cs, fmt17(rep.r[i]), fmt17(rep.integrand[i])});
            line("admissibility[" + cs + "] " + name, to_string(rep.verdict), anchor_for(cond),
                 "exponent=" + fmt10(rep.tail_exponent) + " r2=" + fmt10(rep.r2) +
                     " r_max_used=" + fmt10(rep.r_max_used));
        }
    }

    void identities() {
        std::mt19937_64 rng(c_.seed);
        const Symbol partner = random_partner(rng, 3);
        Csv csv(dir_ / "identities.csv", "identity,interior_max,boundary_max,interior_size");
        auto record = [&](const DefectReport& d, double tol, const std::string& anchor) {
            csv.row({d.identity, fmt17(d.interior_max), fmt17(d.boundary_max), std::to_string(d.interior_size)});
            line("identity[" + d.identity + "]", d.interior_max < tol ? "holds" : "failed", anchor,
                 "interior_max=" + fmt10(d.interior_max));
        };
        record(sarason_defect(h_, partner, 64), 1e-12, "Hankel correction of Toeplitz products");
        record(position_commutator_defect(h_, 128), 1e-12, "position commutator of a Toeplitz operator");
        record(formula_defect(h_, c_.g, 256), 1e-10, "conjugate-operator commutator formula");

        const Symbol dh = derivative(h_);
        const auto s64 = singular_decay(commutator_position_sandwich(dh, h_, 64), 10);
        const auto s128 = singular_decay(commutator_position_sandwich(dh, h_, 128), 10);
        Csv sv(dir_ / "singular_values.csv", "n,k,sigma");
        double diff = 0.0;
        for (int k = 0; k < 10; ++k) {
            sv.row({"64", std::to_string(k), fmt17(s64[k])});
            diff = std::max(diff, std::abs(s64[k] - s128[k]));
        }
        for (int k = 0; k < 10; ++k) sv.row({"128", std::to_string(k), fmt17(s128[k])});
        line("identity[compactness]", diff < 1e-8 ? "holds" : "failed", "size-independent singular values",
             "max_diff=" + fmt10(diff) + " sigma10/sigma1=" + fmt10(s128[0] > 0 ? s128[9] / s128[0] : 0.0));
    }

    const Config& c_;
    Model m_;
    const Symbol& h_;
    std::ostream& log_;
    fs::path dir_;
    std::optional<OperatorMatrix> H_;
    std::optional<SpectralData> sd_;
    std::optional<CriticalSet> crit_;
    std::optional<std::vector<double>> thresholds_;
    std::vector<std::string> summary_;
};

}  // namespace

Model::Model(const Config& c) : h(c.has_factor ? multiply(c.f, c.factor) : c.f), c_(&c) {}

Space Model::space(int N) const { return c_->space.is_half_line() ? Space::half_line(N) : Space::lattice(c_->space.d, N); }

OperatorMatrix Model::base(int N) const {
    if (!c_->space.is_half_line()) return laurent_matrix(h, N, c_->boundary);
    if (!c_->has_factor) return toeplitz_matrix(h, N);
    // Re(T_f T_g) = T_fg - (K_fg + K_gf)/2 with K_ab the Hankel-product correction
    Matrix M = toeplitz_matrix(h, N).data();
    M -= 0.5 * (hankel_correction(c_->f, c_->factor, N) + hankel_correction(c_->factor, c_->f, N));
    return OperatorMatrix(space(N), std::move(M), "Re(T_f T_g)");
}

std::optional<OperatorMatrix> Model::perturbation(int N) const {
    if (c_->potential.empty() && c_->rank1.empty()) return std::nullopt;
    const Space sp = space(N);
    Matrix V = Matrix::Zero(sp.dim(), sp.dim());
    for (const auto& p : c_->potential)
        V += (sp.is_half_line() ? diagonal_potential(p, N) : diagonal_potential(p, sp)).data();
    if (!c_->rank1.empty()) {
        std::vector<Vector> vecs;
        std::vector<double> betas;
        for (const auto& r : c_->rank1) {
            if (r.index >= N) throw Error("rank1 vector e" + std::to_string(r.index + 1) + " outside N=" + std::to_string(N));
            vecs.push_back(unit_vector(N, r.index));
            betas.push_back(r.beta);
        }
        V += finite_rank(vecs, betas, N).data();
    }
    return OperatorMatrix(sp, std::move(V), "V");
}

OperatorMatrix Model::hamiltonian(int N) const {
    auto H = base(N);
    if (auto V = perturbation(N)) return sum(H, *V, "H");
    return H;
}

OperatorMatrix Model::conjugate(int N) const {
    if (c_->space.is_half_line()) return conjugate_operator(c_->g, space(N));
    return conjugate_operator(gradient(h), space(N), c_->boundary);
}

OperatorMatrix Model::commutator(int N) const {
    OperatorMatrix C = !c_->space.is_half_line() ? laurent_matrix(grad_norm_sq(h), N, c_->boundary)
                       : c_->has_factor
                           ? compress([&](int M) { return icommutator(conjugate(M), base(M)).data(); }, N,
                                      h.max_bandwidth() + c_->g.max_bandwidth() + 1, "i[A,H]")
                           : commutator_formula_rhs(h, c_->g, N);
    if (auto V = perturbation(N)) return sum(C, icommutator(conjugate(N), *V), "i[A,H]");
    return C;
}

Symbol Model::commutator_symbol() const {
    if (!c_->space.is_half_line()) return grad_norm_sq(h);
    return multiply(c_->g, derivative(h));
}

void run(const Config& c, std::ostream& log) { Run(c, log).execute(); }

}  // namespace toeplab::cli
