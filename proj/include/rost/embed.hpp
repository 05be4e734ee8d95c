#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rost/boundary.hpp"
#include "rost/measure.hpp"

namespace rost {

struct PathConfig {
    std::size_t n_paths = 100000;
    double dt_sim = 1e-4;  // must be commensurate with the barrier knot spacing
    double t_max = 10.0;
    std::uint64_t seed = 1;
    bool bridge_correction = false;
    /// Absorption checks on a side start only once its level is resolvable
    /// on the source grid (level >= resolve_cells * dx). Below that the
    /// extracted barrier is pure discretization noise.
    double resolve_cells = 8.0;
    int n_threads = 0;  // 0: ROSTBAR_THREADS env var or hardware concurrency
};

struct PathResult {
    bool absorbed = false;
    double sigma = 0;
    double w = 0;  // barrier level at the crossing (the continuous path hits the level)
};

/// Generalized inverse-CDF sample of the source law; deterministic in u.
double sample_initial(const ProbabilityMeasure& nu, double u);

/// One Euler walk against the reversed barrier. Deterministic in
/// (cfg.seed, path_index) regardless of scheduling.
PathResult simulate_sigma_star(const ReversedBarrier& barrier, double x0, const PathConfig& cfg,
                               std::uint64_t path_index);

struct EmbeddingReport {
    std::size_t n_paths = 0;
    double absorbed_fraction = 0;
    double ks_distance = 0;  // sup over eval points of |F_emp - F_mu|, left limits included
    std::map<double, double> atom_frequencies;
    std::vector<double> sigma_quantiles;  // 10/25/50/75/90 percentiles of absorbed sigma
    std::vector<double> samples;          // absorbed terminal values, path order
    std::vector<std::uint8_t> absorbed_flags;
    double atom_tol = 0;
};

/// Simulates sigma* from nu and compares the law of the absorbed values
/// with mu. Unabsorbed paths are excluded from the CDF comparison and show
/// up only through absorbed_fraction.
EmbeddingReport verify_embedding(const ReversedBarrier& barrier, const ProbabilityMeasure& nu,
                                 const ProbabilityMeasure& mu, const PathConfig& cfg,
                                 double atom_tol = 1e-6);

/// Space-time domain a killed walk lives in.
class KillDomain {
public:
    virtual ~KillDomain() = default;
    virtual Extended upper(double t) const = 0;
    virtual Extended lower_abs(double t) const = 0;  // boundary at -lower_abs(t)
};

/// Forward domain: the continuation set of a solve, time running toward T.
class ForwardDomain : public KillDomain {
public:
    explicit ForwardDomain(const BoundarySet& b) : b_(&b) {}
    Extended upper(double t) const override { return b_->plus_at(t); }
    Extended lower_abs(double t) const override { return b_->minus_at(t); }

private:
    const BoundarySet* b_;
};

/// Reverse domain: inside the reversed barrier.
class ReverseDomain : public KillDomain {
public:
    explicit ReverseDomain(const ReversedBarrier& r) : r_(&r) {}
    Extended upper(double t) const override { return r_->plus_at(t); }
    Extended lower_abs(double t) const override { return r_->minus_at(t); }

private:
    const ReversedBarrier* r_;
};

/// No killing (free Brownian motion); used as a sanity domain.
class FreeDomain : public KillDomain {
public:
    Extended upper(double) const override { return Extended::infinity(); }
    Extended lower_abs(double) const override { return Extended::infinity(); }
};

struct KilledDensityEstimate {
    bool forward = true;
    std::vector<double> bin_edges;
    std::vector<double> mass;  // survivor probability per bin
    std::vector<double> se;    // binomial standard error per bin
    double survivor_mass = 0;
};

/// Monte Carlo estimate of the killed transition mass from (t0, x0) to the
/// bins at time t1. `resolve_floor` in absolute units (pass 0 to always
/// check; the embedding path uses resolve_cells * dx).
KilledDensityEstimate killed_density_mc(const KillDomain& domain, double t0, double x0,
                                        double t1, const std::vector<double>& bin_edges,
                                        const PathConfig& cfg, double resolve_floor = 0.0);

struct DualityResult {
    double max_abs_z = 0;
    std::vector<double> z_scores;
    std::vector<double> q_forward;  // density estimates per bin
    std::vector<double> q_reverse;
};

/// Hunt duality: forward killed density from (t, x) at time s, against the
/// reverse killed density from (T-s, y) at time T-t, bin-averaged.
DualityResult check_duality(const BoundarySet& boundaries, const ReversedBarrier& barrier,
                            double T, double t, double x, double s,
                            const std::vector<double>& bin_edges, const PathConfig& cfg);

struct UtCheckResult {
    double fd_value = 0;   // -U_t from the surface, central difference
    double mc_value = 0;   // integral of the reverse killed density against nu
    double rel_error = 0;  // |fd - mc| / max(|fd|, floor)
};

/// -U_t(t,x) = int p^C_-(0, y, T-t, x) nu(dy): finite differences on the
/// surface against a kernel-density MC over reverse-killed paths from nu.
UtCheckResult check_ut_representation(const ValueSurface& surface,
                                      const ReversedBarrier& barrier,
                                      const ProbabilityMeasure& nu, double t, double x,
                                      const PathConfig& cfg, double kernel_bandwidth = 0.08,
                                      double denom_floor = 1e-3);

}  // namespace rost
