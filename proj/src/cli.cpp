#include "rost/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rost/errors.hpp"
#include "rost/serialize.hpp"

namespace rost::cli {

namespace {

struct Pipeline {
    ProblemSpec spec;
    std::string out_dir;
    bool quiet = false;

    void log(const std::string& msg) const {
        if (!quiet) std::cout << msg << '\n';
    }
    std::string path(const std::string& name) const { return out_dir + "/" + name; }

    LatticeParams lattice_params() const {
        LatticeParams p;
        p.dx = spec.dx;
        p.lambda = spec.lambda;
        p.margin = spec.margin;
        return p;
    }

    SolveConfig solve_config(double T) const {
        SolveConfig c;
        if (spec.eps_stop) c.eps_stop = *spec.eps_stop;
        for (const auto& [t, x] : ut_probes(T)) {
            c.store_times.push_back(t);
            c.store_times.push_back(std::max(0.0, t - 0.01));
            c.store_times.push_back(std::min(T, t + 0.01));
        }
        return c;
    }

    std::vector<std::pair<double, double>> ut_probes(double T) const {
        if (!spec.ut_probes.empty()) return spec.ut_probes;
        const PayoffCurve G = PayoffCurve::build(spec.nu, spec.mu);
        return {{T / 4.0, G.argmin()}, {T / 2.0, G.argmin()}};
    }
};

int cmd_validate(const Pipeline& pl) {
    const ValidationReport r = validate(pl.spec.nu, pl.spec.mu);
    Json j = validation_to_json(r);
    if (r.ok()) {
        const SupportSummary s = support_summary(pl.spec.nu, pl.spec.mu);
        j["support"] = summary_to_json(s);
        j["mu_mass_of_gap"] = json_real(pl.spec.mu.mass_open(s.bhat_minus, s.bhat_plus));
    }
    write_text_file(pl.path("validation.json"), j.dump(2) + "\n");
    pl.log(r.ok() ? "validation: ok" : "validation: rejected");
    return r.ok() ? 0 : 3;
}

int cmd_payoff(const Pipeline& pl) {
    const PayoffCurve G = PayoffCurve::build(pl.spec.nu, pl.spec.mu);
    const double lo = G.breakpoints().front() - 1.0, hi = G.breakpoints().back() + 1.0;
    write_text_file(pl.path("payoff.csv"), payoff_csv(G, lo, hi, 2001));
    Json j;
    j["g_plus_inf"] = json_real(G.g_plus_inf());
    j["g_minus_inf"] = json_real(G.g_minus_inf());
    j["argmin"] = json_real(G.argmin());
    j["sup_abs"] = json_real(G.sup_abs());
    write_text_file(pl.path("payoff.json"), j.dump(2) + "\n");
    pl.log("payoff: wrote payoff.csv");
    return 0;
}

struct Solved {
    Problem problem;
    ValueSurface surface;
    BoundarySet boundaries;
};

Solved run_solve(const Pipeline& pl, double T) {
    Problem problem = prepare(pl.spec.nu, pl.spec.mu, T, pl.lattice_params());
    ValueSurface surface = solve(problem, pl.solve_config(T));
    BoundarySet boundaries = extract_boundaries(surface, surface.eps_stop());
    return {std::move(problem), std::move(surface), std::move(boundaries)};
}

int cmd_solve(const Pipeline& pl) {
    Solved s = run_solve(pl, pl.spec.horizon);
    write_text_file(pl.path("metadata.json"),
                    solve_metadata(s.problem, s.surface).dump(2) + "\n");
    write_text_file(pl.path("boundaries.csv"), boundaries_csv(s.boundaries));
    write_text_file(pl.path("slices.csv"), slices_csv(s.surface, 9));
    pl.log("solve: wrote metadata.json, boundaries.csv, slices.csv");
    return 0;
}

int cmd_reverse(const Pipeline& pl) {
    Solved s = run_solve(pl, pl.spec.horizon);
    const ReversedBarrier barrier = reverse(s.boundaries, pl.spec.horizon);
    write_text_file(pl.path("barrier.csv"), barrier_csv(barrier));
    write_text_file(pl.path("phi.csv"), phi_csv(barrier, 801));
    Json det;
    det["flats"] =
        flats_to_json(detect_flats(barrier, pl.spec.level_tol_value(), 0.05));
    det["jumps"] = jumps_to_json(detect_jumps(barrier, pl.spec.jump_tol_value(), pl.spec.mu));
    write_text_file(pl.path("detectors.json"), det.dump(2) + "\n");
    pl.log("reverse: wrote barrier.csv, phi.csv, detectors.json");
    return 0;
}

/// The simulation may run past the reference horizon; the barrier is then
/// built from a solve at max(T, t_max), which agrees with the T-solve on
/// (0, T] by the horizon-consistency identity.
ReversedBarrier embedding_barrier(const Pipeline& pl) {
    const double T_barrier = std::max(pl.spec.horizon, pl.spec.embed.t_max);
    Solved s = run_solve(pl, T_barrier);
    return reverse(s.boundaries, T_barrier);
}

int cmd_embed(const Pipeline& pl) {
    const ReversedBarrier barrier = embedding_barrier(pl);
    const EmbeddingReport rep = verify_embedding(barrier, pl.spec.nu, pl.spec.mu,
                                                 pl.spec.embed, pl.spec.atom_tol_value());
    write_text_file(pl.path("embedding.json"), embedding_to_json(rep).dump(2) + "\n");
    if (pl.spec.dump_samples) write_text_file(pl.path("samples.csv"), samples_csv(rep));
    pl.log("embed: ks_distance=" + std::to_string(rep.ks_distance) +
           " absorbed=" + std::to_string(rep.absorbed_fraction));
    return 0;
}

int cmd_verify(const Pipeline& pl) {
    const double T = pl.spec.horizon;
    Json checks = Json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, bool ok, const Json& detail) {
        Json c;
        c["name"] = name;
        c["pass"] = ok;
        c["detail"] = detail;
        checks.push_back(c);
        all_ok = all_ok && ok;
        pl.log(std::string(ok ? "[PASS] " : "[FAIL] ") + name);
    };

    // validation + support gap
    const ValidationReport vr = validate(pl.spec.nu, pl.spec.mu);
    write_text_file(pl.path("validation.json"), validation_to_json(vr).dump(2) + "\n");
    if (!vr.ok()) {
        record("validation", false, validation_to_json(vr));
        write_text_file(pl.path("checks.json"), checks.dump(2) + "\n");
        return 3;
    }
    record("validation", true, validation_to_json(vr));
    const SupportSummary summary = support_summary(pl.spec.nu, pl.spec.mu);
    const double gap_mass = pl.spec.mu.mass_open(summary.bhat_minus, summary.bhat_plus);
    record("mass_free_gap", gap_mass == 0.0, Json{{"mu_mass", json_real(gap_mass)}});

    // payoff geometry
    const PayoffCurve G = PayoffCurve::build(pl.spec.nu, pl.spec.mu);
    const double sup_limit = std::max(G.g_plus_inf(), G.g_minus_inf());
    double sup_grid = -1e300;
    for (int i = 0; i <= 4000; ++i) {
        const double x = G.breakpoints().front() - 1.0 +
                         (G.breakpoints().back() - G.breakpoints().front() + 2.0) * i / 4000.0;
        sup_grid = std::max(sup_grid, G(x));
    }
    record("payoff_sup_at_limits",
           std::abs(G(0.0)) <= 1e-12 && sup_grid <= sup_limit + 1e-9,
           Json{{"sup_grid", json_real(sup_grid)}, {"sup_limit", json_real(sup_limit)}});

    // solve + invariants
    Solved s = run_solve(pl, T);
    write_text_file(pl.path("metadata.json"), solve_metadata(s.problem, s.surface).dump(2) + "\n");
    write_text_file(pl.path("boundaries.csv"), boundaries_csv(s.boundaries));
    const Lattice& L = s.problem.lattice;
    bool mono_ok = true, dom_ok = true, term_ok = true;
    {
        const auto& rows = s.surface.rows();
        for (auto it = rows.begin(); it != rows.end(); ++it) {
            auto next = std::next(it);
            if (next == rows.end()) break;
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                if (it->second[i] < next->second[i]) mono_ok = false;  // V decreasing in t
                if (it->second[i] < G(L.node(i)) - 1e-12) dom_ok = false;
            }
        }
        const auto& terminal = rows.at(L.n_steps());
        for (std::size_t i = 0; i < terminal.size(); ++i)
            if (terminal[i] != G(L.node(i))) term_ok = false;
    }
    record("surface_invariants",
           mono_ok && dom_ok && term_ok &&
               s.surface.max_spatial_increment() <= 2 * L.dx() + 1e-9,
           Json{{"time_monotone", mono_ok},
                {"obstacle_dominated", dom_ok},
                {"terminal_exact", term_ok},
                {"max_spatial_increment", json_real(s.surface.max_spatial_increment())}});

    // boundary structure
    bool term_b_ok = true;
    const std::size_t last = s.boundaries.n_rows() - 1;
    if (s.boundaries.b_plus[last].is_finite() && s.boundaries.bhat_plus.is_finite())
        term_b_ok = term_b_ok && std::abs(s.boundaries.b_plus[last].value() -
                                          s.boundaries.bhat_plus.value()) <= 2 * L.dx();
    if (s.boundaries.b_minus[last].is_finite() && s.boundaries.bhat_minus.is_finite())
        term_b_ok = term_b_ok && std::abs(s.boundaries.b_minus[last].value() -
                                          s.boundaries.bhat_minus.value()) <= 2 * L.dx();
    record("boundary_structure",
           s.boundaries.max_isotonic_violation <= L.dx() && term_b_ok,
           Json{{"max_isotonic_violation", json_real(s.boundaries.max_isotonic_violation)},
                {"terminal_matches_bhat", term_b_ok}});

    // reversal + detectors
    const ReversedBarrier barrier_T = reverse(s.boundaries, T);
    write_text_file(pl.path("barrier.csv"), barrier_csv(barrier_T));
    write_text_file(pl.path("phi.csv"), phi_csv(barrier_T, 801));
    Json det;
    det["flats"] = flats_to_json(detect_flats(barrier_T, pl.spec.level_tol_value(), 0.05));
    det["jumps"] = jumps_to_json(detect_jumps(barrier_T, pl.spec.jump_tol_value(), pl.spec.mu));
    write_text_file(pl.path("detectors.json"), det.dump(2) + "\n");

    // embedding
    const ReversedBarrier barrier = embedding_barrier(pl);
    const EmbeddingReport rep = verify_embedding(barrier, pl.spec.nu, pl.spec.mu,
                                                 pl.spec.embed, pl.spec.atom_tol_value());
    write_text_file(pl.path("embedding.json"), embedding_to_json(rep).dump(2) + "\n");
    if (pl.spec.dump_samples) write_text_file(pl.path("samples.csv"), samples_csv(rep));
    record("embedding_ks", rep.ks_distance <= pl.spec.ks_max,
           Json{{"ks_distance", json_real(rep.ks_distance)}, {"max", json_real(pl.spec.ks_max)}});
    record("embedding_absorbed", rep.absorbed_fraction >= pl.spec.absorbed_min,
           Json{{"absorbed_fraction", json_real(rep.absorbed_fraction)},
                {"min", json_real(pl.spec.absorbed_min)}});

    // Hunt duality at an interior slice
    PathConfig check_cfg = pl.spec.embed;
    check_cfg.n_paths = pl.spec.check_paths;
    check_cfg.bridge_correction = true;
    const double t_dual = 0.1 * T, s_dual = 0.4 * T;
    std::vector<double> edges;
    {
        const Extended up = barrier_T.plus_at(T - s_dual);
        const Extended dn = barrier_T.minus_at(T - s_dual);
        const double hi2 = up.is_finite() ? up.value() : s.problem.summary.mu_plus;
        const double lo2 = dn.is_finite() ? -dn.value() : -s.problem.summary.mu_minus;
        for (int b = 0; b <= 20; ++b) edges.push_back(lo2 + (hi2 - lo2) * b / 20.0);
    }
    const DualityResult dual = check_duality(s.boundaries, barrier_T, T, t_dual, G.argmin(),
                                             s_dual, edges, check_cfg);
    record("hunt_duality", dual.max_abs_z <= pl.spec.duality_z_max,
           Json{{"max_abs_z", json_real(dual.max_abs_z)},
                {"t", json_real(t_dual)},
                {"s", json_real(s_dual)}});

    // -U_t representation at the probes
    Json probes = Json::array();
    bool ut_ok = true;
    for (const auto& [tp, xp] : pl.ut_probes(T)) {
        const UtCheckResult u =
            check_ut_representation(s.surface, barrier_T, pl.spec.nu, tp, xp, check_cfg);
        ut_ok = ut_ok && u.rel_error <= pl.spec.ut_rel_max;
        probes.push_back({{"t", json_real(tp)},
                          {"x", json_real(xp)},
                          {"fd", json_real(u.fd_value)},
                          {"mc", json_real(u.mc_value)},
                          {"rel_error", json_real(u.rel_error)}});
    }
    record("ut_representation", ut_ok, probes);

    write_text_file(pl.path("checks.json"), checks.dump(2) + "\n");
    return all_ok ? 0 : 1;
}

}  // namespace

int run_command(const std::string& command, const std::string& spec_path,
                const std::string& out_dir, bool quiet) {
    Pipeline pl{ProblemSpec{ProbabilityMeasure({{0.0, 1.0}}, {}),
                            ProbabilityMeasure({{0.0, 1.0}}, {})},
                out_dir, quiet};
    try {
        pl.spec = load_problem_spec(spec_path);
    } catch (const SpecParseError& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return 2;
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory " << out_dir << '\n';
        return 2;
    }
    try {
        if (command == "validate") return cmd_validate(pl);
        if (command == "payoff") return cmd_payoff(pl);
        if (command == "solve") return cmd_solve(pl);
        if (command == "reverse") return cmd_reverse(pl);
        if (command == "embed") return cmd_embed(pl);
        if (command == "verify") return cmd_verify(pl);
        std::cerr << "unknown command: " << command << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "rejected: " << e.what() << '\n';
        return 3;
    } catch (const NoGapError& e) {
        std::cerr << "rejected: " << e.what() << '\n';
        return 3;
    } catch (const DomainTooNarrow& e) {
        std::cerr << "domain too narrow: " << e.what() << '\n';
        return 4;
    } catch (const ClassificationConflict& e) {
        std::cerr << "domain too narrow: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Rost reversed barriers from finite-horizon optimal stopping"};
    app.require_subcommand(1);
    std::string spec_path, out_dir = ".";
    bool quiet = false;
    const char* descriptions[] = {"check assumptions D.1/D.2",
                                  "dump the obstacle G and its one-sided derivatives",
                                  "backward induction surface and stopping boundaries",
                                  "time-reversed barrier, inverse and structure detectors",
                                  "Monte Carlo embedding report",
                                  "full pipeline with pass/fail checks"};
    int d = 0;
    for (const char* name : {"validate", "payoff", "solve", "reverse", "embed", "verify"}) {
        CLI::App* sub = app.add_subcommand(name, descriptions[d++]);
        sub->add_option("--spec", spec_path, "problem spec JSON")->required();
        sub->add_option("--out", out_dir, "output directory (default: cwd)");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return run_command(command, spec_path, out_dir, quiet);
}

}  // namespace rost::cli
