#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rost/boundary.hpp"
#include "rost/embed.hpp"
#include "rost/measure.hpp"
#include "rost/solver.hpp"

namespace rost {

using Json = nlohmann::ordered_json;

/// {"atoms": [[x, w], ...], "pieces": [[lo, hi, density], ...]}
ProbabilityMeasure parse_measure(const Json& j);
Json measure_to_json(const ProbabilityMeasure& m);

/// One batch run: measures, lattice parameters, simulation budget and
/// detector tolerances, from a single JSON document.
struct ProblemSpec {
    ProblemSpec(ProbabilityMeasure nu_, ProbabilityMeasure mu_)
        : nu(std::move(nu_)), mu(std::move(mu_)) {}
    ProbabilityMeasure nu;
    ProbabilityMeasure mu;
    double horizon = 1.0;
    double dx = 0.01;
    double lambda = 0.5;
    double margin = 5.0;
    PathConfig embed;
    bool dump_samples = false;
    std::optional<double> eps_stop;
    std::optional<double> level_tol;   // default 3 dx
    std::optional<double> jump_tol;    // default 5 dx
    std::optional<double> atom_tol;    // default 2.5 dx
    // verify thresholds
    double ks_max = 0.02;
    double absorbed_min = 0.99;
    double duality_z_max = 4.0;
    double ut_rel_max = 0.10;
    std::size_t check_paths = 200000;  // duality / U_t budget for `verify`
    std::vector<std::pair<double, double>> ut_probes;  // defaults to (T/4, a0), (T/2, a0)

    double level_tol_value() const { return level_tol.value_or(3.0 * dx); }
    double jump_tol_value() const { return jump_tol.value_or(5.0 * dx); }
    double atom_tol_value() const { return atom_tol.value_or(2.5 * dx); }
};

/// Throws SpecParseError with a readable message.
ProblemSpec parse_problem_spec(const Json& j);
ProblemSpec load_problem_spec(const std::string& path);

/// Rounds to 12 significant digits so report bytes do not churn on noise.
double round_sig(double v);
Json json_real(double v);
Json extended_to_json(const Extended& e);  // "inf" string for the sentinel

Json validation_to_json(const ValidationReport& r);
Json summary_to_json(const SupportSummary& s);
Json snapping_to_json(const SnapReport& r);
Json solve_metadata(const Problem& problem, const ValueSurface& surface);
Json embedding_to_json(const EmbeddingReport& r);
Json flats_to_json(const std::vector<FlatSegment>& flats);
Json jumps_to_json(const std::vector<JumpEvent>& jumps);

void write_text_file(const std::string& path, const std::string& content);

/// CSV emitters; every file starts with one `#` header naming columns/units.
std::string payoff_csv(const PayoffCurve& payoff, double lo, double hi, std::size_t n_points);
std::string boundaries_csv(const BoundarySet& b);
std::string barrier_csv(const ReversedBarrier& r);
std::string phi_csv(const ReversedBarrier& r, std::size_t n_points);
std::string slices_csv(const ValueSurface& s, std::size_t max_rows);
std::string samples_csv(const EmbeddingReport& r);
std::string histogram_csv(const KilledDensityEstimate& e);

}  // namespace rost
