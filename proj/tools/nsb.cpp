/// @file nsb.cpp
/// @brief Command-line entry point.  Subcommands:
///
///   solve       integrate one trajectory, emit the energy ledger + snapshots
///   verify      run one randomized inequality check, emit a JSON report
///   uniqueness  run a two-trajectory difference experiment and its audit
///   norms       evaluate norm-spec strings on a snapshot file
///
/// Exit codes: 0 success, 1 usage/config/runtime error, 2 certification
/// failure (an audit or inequality check that ran correctly but did not
/// certify, including the certified-mode admission threshold).
///
/// Every run writes into <out>/<YYYYMMDD-HHMMSS>-seed<seed>/ (default out:
/// $NSB_RUN_DIR or "."); each output file is listed in exactly one
/// manifest.json.  Wall-clock goes to timing.txt only, so identical
/// config + seed reproduce every CSV/JSON byte for byte at any thread count.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>

#include "nsbh/inequalities.hpp"
#include "nsbh/io.hpp"
#include "nsbh/norms.hpp"
#include "nsbh/osgood.hpp"
#include "nsbh/random_fields.hpp"
#include "nsbh/solver.hpp"
#include "nsbh/uniqueness.hpp"

namespace {

using namespace nsbh;

// ===========================================================================
// Config file: [section] + key = value, '#' comments, line-numbered errors
// ===========================================================================

struct ConfigEntry {
    std::string value;
    int line = 0;
    mutable bool used = false;
};
using ConfigMap = std::map<std::string, ConfigEntry>; // key: "section.key"

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    ConfigMap out;
    std::string line, section;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": key outside any [section]");
        const std::string full = section + "." + key;
        if (out.count(full))
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": duplicate key '" + full + "' (first at line " +
                                        std::to_string(out[full].line) + ")");
        out[full] = ConfigEntry{value, lineno, false};
    }
    return out;
}

/// Applies one config key if present (and the CLI flag was not passed).
class ConfigApplier {
  public:
    ConfigApplier(const ConfigMap& cfg, const CLI::App* sub, std::string path)
        : cfg_(cfg), sub_(sub), path_(std::move(path)) {}

    template <typename T>
    void apply(const std::string& key, const std::string& flag, T& target) {
        const auto it = cfg_.find(key);
        if (it == cfg_.end()) return;
        it->second.used = true;
        if (!flag.empty() && sub_->count(flag) > 0) return; // explicit flag wins
        std::istringstream ss(it->second.value);
        if constexpr (std::is_same_v<T, bool>) {
            std::string w;
            ss >> w;
            if (w == "true" || w == "1") target = true;
            else if (w == "false" || w == "0") target = false;
            else fail(it, "expected true/false");
        } else if constexpr (std::is_same_v<T, std::string>) {
            target = it->second.value;
        } else {
            if (!(ss >> target) || !(ss >> std::ws).eof()) fail(it, "malformed value");
        }
    }

    void finish() const {
        for (const auto& [key, entry] : cfg_)
            if (!entry.used)
                throw std::invalid_argument(path_ + ":" + std::to_string(entry.line) +
                                            ": unknown key '" + key + "'");
    }

  private:
    [[noreturn]] void fail(ConfigMap::const_iterator it, const std::string& why) const {
        throw std::invalid_argument(path_ + ":" + std::to_string(it->second.line) + ": " + why +
                                    " for '" + it->first + "' (got '" + it->second.value + "')");
    }
    const ConfigMap& cfg_;
    const CLI::App* sub_;
    std::string path_;
};

// ===========================================================================
// Shared option bundles
// ===========================================================================

struct GridOpt {
    std::string spec = "16,16"; ///< "Nh,Nv"
    AnisoGrid parse() const {
        int nh = 0, nv = 0;
        char comma = 0;
        std::istringstream ss(spec);
        if (!(ss >> nh >> comma >> nv) || comma != ',' || !(ss >> std::ws).eof())
            throw std::invalid_argument("--grid expects 'Nh,Nv', got '" + spec + "'");
        return AnisoGrid{nh, nv};
    }
};

struct InitOpt {
    std::string kind = "random"; ///< random | axi | const-rho
    std::uint64_t seed = 1;
    real u_amp = 0.04;   ///< target ||u0||_{H^{0,s}} (random)
    real rho_amp = 0.02; ///< target ||rho0||_{L^2} (random) or the constant
    AxisymmetricData axi{};
};

State build_init(const InitOpt& opt, const AnisoGrid& g, real s) {
    if (opt.kind == "random") {
        const EnsembleSpec spec = EnsembleSpec::power(2.0, 1, opt.seed);
        DyadicFilterBank bank(g);
        NormEngine eng(bank);
        State st;
        st.t = 0.0;
        st.u = random_vector(g, spec, 0, true);
        const real us = eng.sobolev(st.u, 0.0, s);
        if (us > 0.0) {
            const real c = opt.u_amp / us;
            st.u.c1 *= c;
            st.u.c2 *= c;
            st.u.c3 *= c;
        }
        st.rho = random_scalar(g, spec, 0, 3);
        const real rn = st.rho.l2_norm();
        if (rn > 0.0) st.rho *= opt.rho_amp / rn;
        return st;
    }
    if (opt.kind == "axi") return make_axisymmetric(opt.axi, g);
    if (opt.kind == "const-rho") {
        State st;
        st.t = 0.0;
        st.u = VectorField(g);
        st.u.divergence_free = true;
        st.rho = SpectralField(g);
        st.rho.coeffs()[0] = opt.rho_amp; // constant density offset
        return st;
    }
    throw std::invalid_argument("--init must be one of random|axi|const-rho, got '" + opt.kind +
                                "'");
}

json bank_json(const AnisoGrid& g) {
    DyadicFilterBank bank(g);
    return json{{"N0", DyadicFilterBank::N0},
                {"q_min", DyadicFilterBank::q_min},
                {"q_max_v", bank.q_max_v()},
                {"q_max_h", bank.q_max_h()},
                {"low_pass_support", {0.0, 4.0 / 3.0}},
                {"band_pass_support", {0.75, 8.0 / 3.0}},
                {"tight_weight_range", {bank.m_min(), bank.m_max()}}};
}

json ratio_report_json(const RatioReport& rep) {
    json extra = json::object();
    for (const auto& [k, v] : rep.extra) extra[k] = v;
    return json{{"inequality_id", rep.inequality_id},
                {"lhs", rep.lhs},
                {"rhs_without_constant", rep.rhs_without_constant},
                {"ratio", rep.ratio},
                {"worst_case_input_digest", rep.worst_case_input_digest},
                {"extra", extra},
                {"notes", rep.notes}};
}

// ===========================================================================
// solve
// ===========================================================================

int cmd_solve(const SolverConfig& cfg, const InitOpt& init_opt, const std::string& out_dir,
              bool save_all_snapshots) {
    const State init = build_init(init_opt, cfg.grid, cfg.s_index);

    ManifestBuilder manifest(make_run_dir(out_dir, init_opt.seed), "solve", init_opt.seed);
    manifest.set("config", config_json(cfg));
    manifest.set("grid", grid_json(cfg.grid));
    manifest.set("filter_bank", bank_json(cfg.grid));
    manifest.set("init",
                 json{{"kind", init_opt.kind}, {"u_amp", init_opt.u_amp},
                      {"rho_amp", init_opt.rho_amp}});

    const RunResult res = run(cfg, init); // may throw domain_error (admission)

    write_ledger_csv(manifest.output("ledger.csv"), res.ledger);
    if (!res.snapshots.empty()) {
        write_snapshot(manifest.output("snapshot_initial.nsbs"), res.snapshots.front());
        write_snapshot(manifest.output("snapshot_final.nsbs"), res.snapshots.back());
        if (save_all_snapshots)
            for (std::size_t i = 1; i + 1 < res.snapshots.size(); ++i)
                write_snapshot(manifest.output("snapshot_" + std::to_string(i) + ".nsbs"),
                               res.snapshots[i]);
    }
    manifest.set("admission", json{{"lhs", res.ledger.admission_lhs},
                                   {"threshold", res.ledger.admission_rhs},
                                   {"checked", res.ledger.admission_checked},
                                   {"ok", res.ledger.admission_ok}});
    manifest.set("energy_flags", res.ledger.flags);
    manifest.set("aborted", res.ledger.aborted);
    if (res.ledger.aborted) manifest.set("abort_reason", res.ledger.abort_reason);
    manifest.finish();

    std::cout << "run directory: " << manifest.run_dir() << "\n";
    for (const std::string& f : res.ledger.flags) std::cout << "flag: " << f << "\n";
    if (res.ledger.aborted) {
        std::cerr << "aborted: " << res.ledger.abort_reason << "\n";
        return 1;
    }
    return 0;
}

// ===========================================================================
// verify
// ===========================================================================

int cmd_verify(const std::string& which, const GridOpt& grid_opt, int ensemble,
               std::uint64_t seed, real s, real delta, int term, const std::string& out_dir) {
    const AnisoGrid g = grid_opt.parse();
    DyadicFilterBank bank(g);

    json report;
    bool certified = true;

    if (which == "bernstein") {
        const EnsembleSpec spec = EnsembleSpec::white_noise(ensemble, seed);
        const RatioReport rep = check_bernstein(bank, spec, 'v', 2.0, 2.0, 2.0, 2.0, 1);
        report = ratio_report_json(rep);
        // scale-invariance: the per-band ratios must be finite with bounded spread
        real lo = inf, hi = 0.0;
        for (const auto& [k, v] : rep.extra)
            if (k.rfind("band_", 0) == 0 && v > 0.0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        certified = std::isfinite(rep.ratio) && hi > 0.0 && hi / lo <= 6.0;
        report["certified_rule"] = "finite ratio and per-band spread <= 6";
    } else if (which == "product") {
        const EnsembleSpec spec = EnsembleSpec::power(1.0, ensemble, seed);
        const RatioReport rep = check_product_rule(bank, spec, 0.5, 0.5, s, std::max(s, 0.75));
        report = ratio_report_json(rep);
        const real shift = rep.extra.count("shifted_ratio") ? rep.extra.at("shifted_ratio") : 0.0;
        certified = std::isfinite(rep.ratio) && rep.ratio > 0.0 &&
                    (shift == 0.0 || (shift / rep.ratio <= 4.0 && rep.ratio / shift <= 4.0));
        report["certified_rule"] = "finite ratio and dyadic-shift stability within factor 4";
    } else if (which == "commutator") {
        const EnsembleSpec spec = EnsembleSpec::aniso(0.0, 1.25, ensemble, seed);
        const int q_hi = bank.q_max_v();
        const RatioReport rep = check_commutator(bank, spec, 1, q_hi);
        report = ratio_report_json(rep);
        const real slope = rep.extra.at("slope");
        certified = slope >= -1.5 && slope <= -0.5;
        report["certified_rule"] = "fitted lhs slope in [-1.5, -0.5]";
    } else if (which == "lemma5") {
        const EnsembleSpec spec = EnsembleSpec::power(1.5, 2 * ensemble, seed);
        bool all_hold = true;
        real worst = 0.0;
        json samples = json::array();
        for (int i = 0; i < ensemble; ++i) {
            const VectorField a = random_vector(g, spec, 2 * i, true);
            const VectorField b = random_vector(g, spec, 2 * i + 1, false);
            const Lemma5Report rep = check_lemma5(bank, a, b, s, delta);
            all_hold = all_hold && rep.explicit_constant_holds;
            worst = std::max(worst, rep.vertical_pairing.ratio);
            if (i < 4)
                samples.push_back(json{{"advection", ratio_report_json(rep.advection)},
                                       {"vertical_pairing",
                                        ratio_report_json(rep.vertical_pairing)}});
        }
        report = json{{"inequality_id", "lemma5"},
                      {"samples", samples},
                      {"worst_vertical_pairing_ratio", worst},
                      {"explicit_constant_holds", all_hold}};
        certified = all_hold;
        report["certified_rule"] = "literal (1/4, 1) inequality on every sample";
    } else if (which == "prop1") {
        const EnsembleSpec spec = EnsembleSpec::power(1.5, 5 * ensemble, seed);
        real worst = 0.0;
        for (int i = 0; i < ensemble; ++i) {
            const VectorField u = random_vector(g, spec, 5 * i, true);
            const VectorField v = random_vector(g, spec, 5 * i + 1, true);
            const VectorField w = u - v;
            const SpectralField eta = random_scalar(g, spec, 5 * i + 3);
            const SpectralField theta = random_scalar(g, spec, 5 * i + 4);
            const RatioReport rep = check_prop1_term(bank, term, u, v, w, eta, eta, theta, s);
            worst = std::max(worst, rep.ratio);
            if (i == 0) report = ratio_report_json(rep);
        }
        report["ensemble_max_ratio"] = worst;
        certified = std::isfinite(worst);
        report["certified_rule"] = "finite ensemble-max ratio";
    } else if (which == "embedding") {
        const EnsembleSpec spec = EnsembleSpec::power(1.0, ensemble, seed);
        const RatioReport rep = check_embedding_l4h_linfv(bank, spec, std::max(s, 0.75));
        report = ratio_report_json(rep);
        const real gap = rep.extra.count("minkowski_gap") ? rep.extra.at("minkowski_gap") : 0.0;
        certified = std::isfinite(rep.ratio) && gap >= -1e-10;
        report["certified_rule"] = "finite ratio and nonnegative norm-interchange gap";
    } else {
        throw std::invalid_argument(
            "--inequality must be one of "
            "bernstein|product|commutator|lemma5|prop1|embedding, got '" +
            which + "'");
    }

    report["certified"] = certified;
    report["ensemble"] = ensemble;

    ManifestBuilder manifest(make_run_dir(out_dir, seed), "verify", seed);
    manifest.set("inequality", which);
    manifest.set("grid", grid_json(g));
    manifest.set("filter_bank", bank_json(g));
    manifest.set("ensemble", ensemble);
    write_json(manifest.output("report.json"), report);
    manifest.finish();

    std::cout << "run directory: " << manifest.run_dir() << "\n"
              << "inequality " << which << ": " << (certified ? "certified" : "NOT certified")
              << "\n";
    return certified ? 0 : 2;
}

// ===========================================================================
// uniqueness
// ===========================================================================

int cmd_uniqueness(const SolverConfig& cfg, const InitOpt& init_opt,
                   const PerturbationSpec& pert, const std::string& out_dir, real c_frozen) {
    const State base = build_init(init_opt, cfg.grid, cfg.s_index);
    const PairRun pr = make_pair_run(cfg, base, pert);

    ManifestBuilder manifest(make_run_dir(out_dir, init_opt.seed), "uniqueness", init_opt.seed);
    manifest.set("config", config_json(cfg));
    manifest.set("grid", grid_json(cfg.grid));
    manifest.set("filter_bank", bank_json(cfg.grid));
    manifest.set("perturbation", pr.perturbation);

    const DifferenceSeries ds = run_pair(pr); // may throw domain_error (admission)
    write_difference_csv(manifest.output("difference.csv"), ds);

    json audit;
    bool certified = false;
    if (cfg.s_index > 0.5) {
        const GronwallAudit ga = c_frozen > 0.0 ? gronwall_audit(ds, cfg.s_index, c_frozen)
                                                : gronwall_audit(ds, cfg.s_index);
        audit = json{{"kind", "gronwall"},
                     {"certified", ga.certified},
                     {"c_fit", ga.c_fit},
                     {"fitted", ga.fitted},
                     {"zero_data", ga.zero_data},
                     {"min_margin", ga.min_margin},
                     {"margin_curve", ga.margin_curve},
                     {"envelope", ga.envelope}};
        certified = ga.certified;
    } else {
        const OsgoodAuditResult oa =
            c_frozen > 0.0 ? osgood_audit(ds, c_frozen) : osgood_audit(ds);
        audit = json{{"kind", "osgood"},
                     {"certified", oa.certified},
                     {"c_fit", oa.c_fit},
                     {"fitted", oa.fitted},
                     {"zero_data", oa.zero_data},
                     {"window_rows", oa.window_rows},
                     {"window_shortened", oa.window_shortened},
                     {"min_margin", oa.min_margin}};
        certified = oa.certified;
    }
    if (ds.truncated) audit["truncated"] = ds.flag;
    write_json(manifest.output("audit.json"), audit);
    manifest.finish();

    std::cout << "run directory: " << manifest.run_dir() << "\n"
              << "audit: " << (certified ? "certified" : "NOT certified") << "\n";
    return certified ? 0 : 2;
}

// ===========================================================================
// norms
// ===========================================================================

int cmd_norms(const std::string& snapshot_path, const std::vector<std::string>& specs,
              const std::string& field, const std::string& out_dir) {
    const State st = read_snapshot(snapshot_path);
    DyadicFilterBank bank(st.u.grid());
    NormEngine eng(bank);

    json values = json::object();
    for (const std::string& spec_str : specs) {
        const NormSpec spec = parse_norm_spec(spec_str);
        real v = 0.0;
        if (field == "rho") {
            v = eng.norm(st.rho, spec);
        } else if (field == "u1" || field == "u2" || field == "u3") {
            const int c = field[1] - '0';
            v = eng.norm(st.u.comp(c), spec);
        } else if (field == "u") {
            v = std::sqrt(sq(eng.norm(st.u.c1, spec)) + sq(eng.norm(st.u.c2, spec)) +
                          sq(eng.norm(st.u.c3, spec)));
        } else {
            throw std::invalid_argument("--field must be u|u1|u2|u3|rho, got '" + field + "'");
        }
        values[spec_str] = v;
    }
    json out{{"snapshot", snapshot_path}, {"field", field}, {"t", st.t},
             {"grid", grid_json(st.u.grid())}, {"norms", values}};
    std::cout << out.dump(2) << "\n";

    if (!out_dir.empty()) {
        ManifestBuilder manifest(make_run_dir(out_dir, 0), "norms", 0);
        manifest.set("snapshot", snapshot_path);
        write_json(manifest.output("norms.json"), out);
        manifest.finish();
        std::cout << "run directory: " << manifest.run_dir() << "\n";
    }
    return 0;
}

} // namespace

// ===========================================================================
// main
// ===========================================================================

int main(int argc, char** argv) {
    CLI::App app{"anisotropic spectral toolkit: horizontally-dissipative convection"};
    app.require_subcommand(1);
    int thread_count = 1;
    app.add_option("--threads", thread_count, "worker threads (default 1; reductions are "
                                              "thread-count independent)");

    // ---- solve ----
    SolverConfig scfg;
    InitOpt sinit;
    GridOpt sgrid;
    std::string s_out, s_config;
    bool s_all_snaps = false;
    CLI::App* solve = app.add_subcommand("solve", "integrate one trajectory");
    solve->add_option("--config", s_config, "config file ([solver]/[init] sections)");
    solve->add_option("--grid", sgrid.spec, "grid 'Nh,Nv'");
    solve->add_option("--n-cutoff", scfg.n_cutoff, "frequency-ball radius");
    solve->add_option("--dt", scfg.dt, "time step (0 = advective auto-step)");
    solve->add_option("--t-end", scfg.t_end, "final time");
    solve->add_option("--s", scfg.s_index, "vertical regularity index s in [1/2,1]");
    solve->add_option("--delta", scfg.delta_index, "density index delta in [0,s]");
    solve->add_option("--record-every", scfg.record_every, "ledger cadence in steps");
    solve->add_flag("--no-dealias", [&](std::int64_t) { scfg.dealias = false; },
                    "disable the 2/3 rule");
    solve->add_flag("--certified", scfg.certified, "demand the admission threshold");
    solve->add_option("--c0", scfg.c0, "admission constant (threshold c0^2)");
    solve->add_option("--init", sinit.kind, "random | axi | const-rho");
    solve->add_option("--seed", sinit.seed, "RNG seed");
    solve->add_option("--u-amp", sinit.u_amp, "target ||u0||_{H^{0,s}} (random init)");
    solve->add_option("--rho-amp", sinit.rho_amp, "target ||rho0||_{L^2} / constant value");
    solve->add_option("--amplitude", sinit.axi.amplitude, "axi: velocity amplitude");
    solve->add_option("--radial-scale", sinit.axi.radial_scale, "axi: radial scale");
    solve->add_option("--vertical-scale", sinit.axi.vertical_scale, "axi: vertical scale");
    solve->add_option("--ring-radius", sinit.axi.ring_radius, "axi: ring radius");
    solve->add_option("--rho-amplitude", sinit.axi.rho_amplitude, "axi: density amplitude");
    solve->add_option("--rho-radial-scale", sinit.axi.rho_radial_scale,
                      "axi: density radial scale");
    solve->add_option("--rho-vertical-scale", sinit.axi.rho_vertical_scale,
                      "axi: density vertical scale");
    solve->add_flag("--save-snapshots", s_all_snaps, "write every recorded snapshot");
    solve->add_option("--out", s_out, "output base directory");

    // ---- verify ----
    std::string v_ineq, v_out;
    GridOpt vgrid;
    int v_ensemble = 10, v_term = 1;
    std::uint64_t v_seed = 1;
    real v_s = 0.75, v_delta = 0.5;
    CLI::App* verify = app.add_subcommand("verify", "randomized inequality checks");
    verify->add_option("--inequality", v_ineq,
                       "bernstein|product|commutator|lemma5|prop1|embedding")
        ->required();
    verify->add_option("--grid", vgrid.spec, "grid 'Nh,Nv'");
    verify->add_option("--ensemble", v_ensemble, "sample count");
    verify->add_option("--seed", v_seed, "RNG seed");
    verify->add_option("--s", v_s, "vertical index s");
    verify->add_option("--delta", v_delta, "density index delta");
    verify->add_option("--term", v_term, "difference-term index 1..9 (prop1)");
    verify->add_option("--out", v_out, "output base directory");

    // ---- uniqueness ----
    SolverConfig ucfg;
    ucfg.t_end = 0.25;
    ucfg.dt = 0.01;
    InitOpt uinit;
    GridOpt ugrid{"32,32"};
    PerturbationSpec upert;
    upert.kind = PerturbationSpec::Kind::white_band;
    upert.epsilon = 1e-6;
    std::string u_out, u_config, u_pert_kind = "white-band";
    real u_c_frozen = 0.0;
    CLI::App* uniq = app.add_subcommand("uniqueness", "two-trajectory difference experiment");
    uniq->add_option("--config", u_config, "config file ([solver]/[init]/[perturbation])");
    uniq->add_option("--grid", ugrid.spec, "grid 'Nh,Nv'");
    uniq->add_option("--n-cutoff", ucfg.n_cutoff, "frequency-ball radius");
    uniq->add_option("--dt", ucfg.dt, "shared lockstep time step");
    uniq->add_option("--t-end", ucfg.t_end, "final time");
    uniq->add_option("--s", ucfg.s_index, "s > 1/2: Gronwall audit; s = 1/2: Osgood audit");
    uniq->add_option("--delta", ucfg.delta_index, "density index delta");
    uniq->add_option("--record-every", ucfg.record_every, "record cadence in steps");
    uniq->add_flag("--certified", ucfg.certified, "demand the admission threshold");
    uniq->add_option("--c0", ucfg.c0, "admission constant");
    uniq->add_option("--seed", uinit.seed, "base-state RNG seed");
    uniq->add_option("--u-amp", uinit.u_amp, "target ||u0||_{H^{0,s}}");
    uniq->add_option("--rho-amp", uinit.rho_amp, "target ||rho0||_{L^2}");
    uniq->add_option("--perturbation", u_pert_kind, "none|single-mode|white-band|rho-only");
    uniq->add_option("--epsilon", upert.epsilon, "perturbation amplitude");
    uniq->add_option("--mode", upert.k1, "single-mode k1 (with --mode2/--mode3)");
    uniq->add_option("--mode2", upert.k2, "single-mode k2");
    uniq->add_option("--mode3", upert.k3, "single-mode k3");
    uniq->add_option("--band-q", upert.band_q, "white-band vertical block index");
    uniq->add_option("--pert-seed", upert.seed, "perturbation RNG seed");
    uniq->add_option("--c-frozen", u_c_frozen, "certify with this frozen audit constant");
    uniq->add_option("--out", u_out, "output base directory");

    // ---- norms ----
    std::string n_snapshot, n_field = "u", n_out;
    std::vector<std::string> n_specs;
    CLI::App* norms = app.add_subcommand("norms", "evaluate norm specs on a snapshot");
    norms->add_option("--snapshot", n_snapshot, "snapshot file (.nsbs)")->required();
    norms->add_option("--spec", n_specs, "norm spec, e.g. H:0:0.5, B:2,2:0:0.5, L:4h,infv")
        ->required();
    norms->add_option("--field", n_field, "u|u1|u2|u3|rho");
    norms->add_option("--out", n_out, "output base directory");

    if (argc <= 1) {
        std::cerr << app.help() << std::flush;
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the parse error
        return code == 0 ? 0 : 1;
    }

    try {
        threads::set_count(thread_count);

        if (*solve) {
            if (!s_config.empty()) {
                const ConfigMap cm = parse_config_file(s_config);
                ConfigApplier ap(cm, solve, s_config);
                ap.apply("solver.grid", "--grid", sgrid.spec);
                ap.apply("solver.n_cutoff", "--n-cutoff", scfg.n_cutoff);
                ap.apply("solver.dt", "--dt", scfg.dt);
                ap.apply("solver.t_end", "--t-end", scfg.t_end);
                ap.apply("solver.s_index", "--s", scfg.s_index);
                ap.apply("solver.delta_index", "--delta", scfg.delta_index);
                ap.apply("solver.record_every", "--record-every", scfg.record_every);
                ap.apply("solver.dealias", "", scfg.dealias);
                ap.apply("solver.certified", "--certified", scfg.certified);
                ap.apply("solver.c0", "--c0", scfg.c0);
                ap.apply("init.kind", "--init", sinit.kind);
                ap.apply("init.seed", "--seed", sinit.seed);
                ap.apply("init.u_amp", "--u-amp", sinit.u_amp);
                ap.apply("init.rho_amp", "--rho-amp", sinit.rho_amp);
                ap.apply("init.amplitude", "--amplitude", sinit.axi.amplitude);
                ap.apply("init.radial_scale", "--radial-scale", sinit.axi.radial_scale);
                ap.apply("init.vertical_scale", "--vertical-scale", sinit.axi.vertical_scale);
                ap.apply("init.ring_radius", "--ring-radius", sinit.axi.ring_radius);
                ap.apply("init.rho_amplitude", "--rho-amplitude", sinit.axi.rho_amplitude);
                ap.apply("init.rho_radial_scale", "--rho-radial-scale",
                         sinit.axi.rho_radial_scale);
                ap.apply("init.rho_vertical_scale", "--rho-vertical-scale",
                         sinit.axi.rho_vertical_scale);
                ap.finish();
            }
            scfg.grid = sgrid.parse();
            if (scfg.n_cutoff <= 0.0) // sensible default: the dealias ball
                scfg.n_cutoff = static_cast<real>(scfg.grid.dealias_kmax_v()) / scfg.grid.Lv;
            return cmd_solve(scfg, sinit, s_out, s_all_snaps);
        }
        if (*verify)
            return cmd_verify(v_ineq, vgrid, v_ensemble, v_seed, v_s, v_delta, v_term, v_out);
        if (*uniq) {
            if (!u_config.empty()) {
                const ConfigMap cm = parse_config_file(u_config);
                ConfigApplier ap(cm, uniq, u_config);
                ap.apply("solver.grid", "--grid", ugrid.spec);
                ap.apply("solver.n_cutoff", "--n-cutoff", ucfg.n_cutoff);
                ap.apply("solver.dt", "--dt", ucfg.dt);
                ap.apply("solver.t_end", "--t-end", ucfg.t_end);
                ap.apply("solver.s_index", "--s", ucfg.s_index);
                ap.apply("solver.delta_index", "--delta", ucfg.delta_index);
                ap.apply("solver.record_every", "--record-every", ucfg.record_every);
                ap.apply("solver.dealias", "", ucfg.dealias);
                ap.apply("solver.certified", "--certified", ucfg.certified);
                ap.apply("solver.c0", "--c0", ucfg.c0);
                ap.apply("init.seed", "--seed", uinit.seed);
                ap.apply("init.u_amp", "--u-amp", uinit.u_amp);
                ap.apply("init.rho_amp", "--rho-amp", uinit.rho_amp);
                ap.apply("perturbation.kind", "--perturbation", u_pert_kind);
                ap.apply("perturbation.epsilon", "--epsilon", upert.epsilon);
                ap.apply("perturbation.k1", "--mode", upert.k1);
                ap.apply("perturbation.k2", "--mode2", upert.k2);
                ap.apply("perturbation.k3", "--mode3", upert.k3);
                ap.apply("perturbation.band_q", "--band-q", upert.band_q);
                ap.apply("perturbation.seed", "--pert-seed", upert.seed);
                ap.finish();
            }
            ucfg.grid = ugrid.parse();
            if (ucfg.n_cutoff <= 0.0)
                ucfg.n_cutoff = static_cast<real>(ucfg.grid.dealias_kmax_v()) / ucfg.grid.Lv;
            if (u_pert_kind == "none") upert.kind = PerturbationSpec::Kind::none;
            else if (u_pert_kind == "single-mode")
                upert.kind = PerturbationSpec::Kind::single_mode;
            else if (u_pert_kind == "white-band")
                upert.kind = PerturbationSpec::Kind::white_band;
            else if (u_pert_kind == "rho-only") upert.kind = PerturbationSpec::Kind::rho_only;
            else
                throw std::invalid_argument(
                    "--perturbation must be none|single-mode|white-band|rho-only, got '" +
                    u_pert_kind + "'");
            return cmd_uniqueness(ucfg, uinit, upert, u_out, u_c_frozen);
        }
        if (*norms) return cmd_norms(n_snapshot, n_specs, n_field, n_out);
    } catch (const std::domain_error& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1; // unreachable with require_subcommand(1)
}
