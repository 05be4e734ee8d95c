#include "rost/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rost/errors.hpp"

namespace rost {

ProbabilityMeasure parse_measure(const Json& j) {
    if (!j.is_object()) throw SpecParseError("measure spec must be an object");
    std::vector<Atom> atoms;
    std::vector<DensityPiece> pieces;
    if (j.contains("atoms")) {
        for (const auto& a : j.at("atoms")) {
            if (!a.is_array() || a.size() != 2)
                throw SpecParseError("each atom must be [location, mass]");
            atoms.push_back({a[0].get<double>(), a[1].get<double>()});
        }
    }
    if (j.contains("pieces")) {
        for (const auto& p : j.at("pieces")) {
            if (!p.is_array() || p.size() != 3)
                throw SpecParseError("each piece must be [lo, hi, density]");
            pieces.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
        }
    }
    try {
        return ProbabilityMeasure(std::move(atoms), std::move(pieces));
    } catch (const MeasureError& e) {
        throw SpecParseError(std::string("invalid measure: ") + e.what());
    }
}

Json measure_to_json(const ProbabilityMeasure& m) {
    Json j;
    j["atoms"] = Json::array();
    for (const Atom& a : m.atoms()) j["atoms"].push_back({json_real(a.location), json_real(a.mass)});
    j["pieces"] = Json::array();
    for (const DensityPiece& p : m.pieces())
        j["pieces"].push_back({json_real(p.lo), json_real(p.hi), json_real(p.density)});
    return j;
}

ProblemSpec parse_problem_spec(const Json& j) {
    if (!j.is_object()) throw SpecParseError("problem spec must be a JSON object");
    for (const char* key : {"nu", "mu", "horizon", "dx"})
        if (!j.contains(key)) throw SpecParseError(std::string("missing required key: ") + key);
    ProblemSpec s{parse_measure(j.at("nu")), parse_measure(j.at("mu"))};
    s.horizon = j.at("horizon").get<double>();
    s.dx = j.at("dx").get<double>();
    if (!(s.horizon > 0) || !(s.dx > 0)) throw SpecParseError("horizon and dx must be positive");
    s.lambda = j.value("lambda", 0.5);
    s.margin = j.value("margin", 5.0);
    if (j.contains("embed")) {
        const Json& e = j.at("embed");
        s.embed.n_paths = e.value("n_paths", std::size_t(100000));
        s.embed.dt_sim = e.value("dt_sim", 1e-4);
        s.embed.t_max = e.value("t_max", 10.0);
        s.embed.seed = e.value("seed", std::uint64_t(1));
        s.embed.bridge_correction = e.value("bridge_correction", false);
        s.embed.resolve_cells = e.value("resolve_cells", 8.0);
        s.dump_samples = e.value("dump_samples", false);
    }
    if (j.contains("tolerances")) {
        const Json& t = j.at("tolerances");
        if (t.contains("eps_stop")) s.eps_stop = t.at("eps_stop").get<double>();
        if (t.contains("level_tol")) s.level_tol = t.at("level_tol").get<double>();
        if (t.contains("jump_tol")) s.jump_tol = t.at("jump_tol").get<double>();
        if (t.contains("atom_tol")) s.atom_tol = t.at("atom_tol").get<double>();
    }
    if (j.contains("verify")) {
        const Json& v = j.at("verify");
        s.ks_max = v.value("ks_max", 0.02);
        s.absorbed_min = v.value("absorbed_min", 0.99);
        s.duality_z_max = v.value("duality_z_max", 4.0);
        s.ut_rel_max = v.value("ut_rel_max", 0.10);
        s.check_paths = v.value("check_paths", std::size_t(200000));
        if (v.contains("ut_probes"))
            for (const auto& p : v.at("ut_probes"))
                s.ut_probes.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return s;
}

ProblemSpec load_problem_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecParseError("cannot open spec file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SpecParseError(std::string("JSON parse failure: ") + e.what());
    }
    return parse_problem_spec(j);
}

double round_sig(double v) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

Json json_real(double v) { return Json(round_sig(v)); }

Json extended_to_json(const Extended& e) {
    if (e.is_infinite()) return Json("inf");
    return json_real(e.value());
}

Json validation_to_json(const ValidationReport& r) {
    Json j;
    j["d1_ok"] = r.d1_ok;
    j["d2_ok"] = r.d2_ok;
    j["connected_ok"] = r.connected_ok;
    j["messages"] = r.messages;
    return j;
}

Json summary_to_json(const SupportSummary& s) {
    Json j;
    j["a_plus"] = json_real(s.a_plus);
    j["a_minus"] = json_real(s.a_minus);
    j["mu_plus"] = json_real(s.mu_plus);
    j["mu_minus"] = json_real(s.mu_minus);
    j["bhat_plus"] = extended_to_json(s.bhat_plus);
    j["bhat_minus"] = extended_to_json(s.bhat_minus);
    return j;
}

Json snapping_to_json(const SnapReport& r) {
    Json j;
    j["max_bias"] = json_real(r.max_bias);
    j["entries"] = Json::array();
    for (const auto& e : r.entries) {
        Json q;
        q["measure"] = e.which == 'n' ? "nu" : "mu";
        q["from"] = json_real(e.from);
        q["to"] = json_real(e.to);
        q["bias"] = json_real(e.bias);
        j["entries"].push_back(q);
    }
    return j;
}

Json solve_metadata(const Problem& problem, const ValueSurface& surface) {
    const Lattice& L = problem.lattice;
    Json j;
    j["lattice"] = {{"x_lo", json_real(L.x_lo())},
                    {"x_hi", json_real(L.x_hi())},
                    {"dx", json_real(L.dx())},
                    {"dt", json_real(L.dt())},
                    {"lambda", json_real(L.lambda())},
                    {"horizon", json_real(L.T())},
                    {"n_nodes", L.n_nodes()},
                    {"n_steps", L.n_steps()}};
    j["eps_stop"] = json_real(surface.eps_stop());
    j["snapping"] = snapping_to_json(problem.snapping);
    j["support"] = summary_to_json(problem.summary);
    j["upper_boundary_finite"] = problem.upper_finite;
    j["lower_boundary_finite"] = problem.lower_finite;
    j["max_spatial_increment"] = json_real(surface.max_spatial_increment());
    const InfiniteHorizonResult ih = infinite_horizon(problem.payoff, problem.summary);
    const char* tag = ih.case_tag == HorizonCase::balanced        ? "balanced"
                      : ih.case_tag == HorizonCase::right_dominant ? "right_dominant"
                      : ih.case_tag == HorizonCase::left_dominant  ? "left_dominant"
                                                                   : "unbounded";
    j["infinite_horizon"] = {{"v", json_real(ih.v)},
                             {"case", tag},
                             {"c_inf_hi", extended_to_json(ih.c_inf_hi)},
                             {"c_inf_lo_abs", extended_to_json(ih.c_inf_lo_abs)}};
    return j;
}

Json embedding_to_json(const EmbeddingReport& r) {
    Json j;
    j["n_paths"] = r.n_paths;
    j["absorbed_fraction"] = json_real(r.absorbed_fraction);
    j["ks_distance"] = json_real(r.ks_distance);
    j["atom_tol"] = json_real(r.atom_tol);
    Json atoms = Json::array();
    for (const auto& [loc, freq] : r.atom_frequencies)
        atoms.push_back({{"location", json_real(loc)}, {"frequency", json_real(freq)}});
    j["atom_frequencies"] = atoms;
    Json q;
    const char* names[] = {"p10", "p25", "p50", "p75", "p90"};
    for (std::size_t i = 0; i < r.sigma_quantiles.size() && i < 5; ++i)
        q[names[i]] = json_real(r.sigma_quantiles[i]);
    j["sigma_star_quantiles"] = q;
    return j;
}

Json flats_to_json(const std::vector<FlatSegment>& flats) {
    Json j = Json::array();
    for (const auto& f : flats)
        j.push_back({{"side", std::string(1, f.side)},
                     {"level", json_real(f.level)},
                     {"t_start", json_real(f.t_start)},
                     {"t_end", json_real(f.t_end)}});
    return j;
}

Json jumps_to_json(const std::vector<JumpEvent>& jumps) {
    Json j = Json::array();
    for (const auto& e : jumps) {
        Json q;
        q["side"] = std::string(1, e.side);
        q["t"] = json_real(e.t);
        q["level_before"] = json_real(e.level_before);
        if (e.to_infinity)
            q["level_after"] = "inf";
        else
            q["level_after"] = json_real(e.level_after);
        q["gap_mu_mass"] = json_real(e.gap_mu_mass);
        j.push_back(q);
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}
std::string fmt(const Extended& e) { return e.is_infinite() ? "inf" : fmt(e.value()); }
}  // namespace

std::string payoff_csv(const PayoffCurve& payoff, double lo, double hi, std::size_t n_points) {
    std::ostringstream out;
    out << "# payoff curve: x (space units), G(x), G'(x+), G'(x-)\n";
    std::vector<double> xs;
    for (std::size_t i = 0; i < n_points; ++i)
        xs.push_back(lo + (hi - lo) * double(i) / double(n_points - 1));
    for (double b : payoff.breakpoints())
        if (b > lo && b < hi) xs.push_back(b);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs)
        out << fmt(x) << ',' << fmt(payoff(x)) << ',' << fmt(payoff.deriv_right(x)) << ','
            << fmt(payoff.deriv_left(x)) << '\n';
    return out.str();
}

std::string boundaries_csv(const BoundarySet& b) {
    std::ostringstream out;
    out << "# stopping boundaries on the solve grid: t (time units), b_plus, b_minus"
           " (space units, \"inf\" = no boundary on that side); dt=" << fmt(b.dt)
        << " dx=" << fmt(b.dx) << '\n';
    for (std::size_t k = 0; k < b.n_rows(); ++k)
        out << fmt(b.time(k)) << ',' << fmt(b.b_plus[k]) << ',' << fmt(b.b_minus[k]) << '\n';
    return out.str();
}

std::string barrier_csv(const ReversedBarrier& r) {
    std::ostringstream out;
    out << "# reversed barrier knots: t, s_plus, s_minus (space units, left-continuous steps);"
           " dt=" << fmt(r.dt()) << " s(0)=bhat\n";
    out << "0," << fmt(r.s0_plus()) << ',' << fmt(r.s0_minus()) << '\n';
    for (std::size_t j = 1; j <= r.n_knots(); ++j)
        out << fmt(double(j) * r.dt()) << ',' << fmt(r.plus_knots()[j - 1]) << ','
            << fmt(r.minus_knots()[j - 1]) << '\n';
    return out.str();
}

std::string phi_csv(const ReversedBarrier& r, std::size_t n_points) {
    InverseBarrier inv(r);
    double hi = 0.0;
    for (const auto& e : r.plus_knots())
        if (e.is_finite()) hi = std::max(hi, e.value());
    double lo = 0.0;
    for (const auto& e : r.minus_knots())
        if (e.is_finite()) lo = std::max(lo, e.value());
    std::ostringstream out;
    out << "# generalized inverse: x (space units), phi(x) (time units, \"inf\" = level never"
           " reached)\n";
    for (std::size_t i = 0; i < n_points; ++i) {
        const double x = -lo - 0.2 + (hi + 0.2 - (-lo - 0.2)) * double(i) / double(n_points - 1);
        out << fmt(x) << ',' << fmt(inv.phi(x)) << '\n';
    }
    return out.str();
}

std::string slices_csv(const ValueSurface& s, std::size_t max_rows) {
    const Lattice& L = s.lattice();
    std::ostringstream out;
    out << "# value surface slices: t, x, V, U=V-G; dx=" << fmt(L.dx()) << " dt=" << fmt(L.dt())
        << '\n';
    std::size_t emitted = 0;
    const std::size_t stride = std::max<std::size_t>(1, s.rows().size() / max_rows);
    std::size_t idx = 0;
    for (const auto& [k, row] : s.rows()) {
        if (idx++ % stride) continue;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double x = L.node(i);
            out << fmt(double(k) * L.dt()) << ',' << fmt(x) << ',' << fmt(row[i]) << ','
                << fmt(row[i] - s.payoff()(x)) << '\n';
        }
        if (++emitted >= max_rows) break;
    }
    return out.str();
}

std::string samples_csv(const EmbeddingReport& r) {
    std::ostringstream out;
    out << "# embedding samples: absorbed terminal value w (space units), one per absorbed"
           " path\n";
    for (double w : r.samples) out << fmt(w) << '\n';
    return out.str();
}

std::string histogram_csv(const KilledDensityEstimate& e) {
    std::ostringstream out;
    out << "# killed-density histogram: bin_lo, bin_hi (space units), mass, se; direction="
        << (e.forward ? "forward" : "reverse") << '\n';
    for (std::size_t b = 0; b + 1 < e.bin_edges.size(); ++b)
        out << fmt(e.bin_edges[b]) << ',' << fmt(e.bin_edges[b + 1]) << ',' << fmt(e.mass[b])
            << ',' << fmt(e.se[b]) << '\n';
    return out.str();
}

}  // namespace rost
