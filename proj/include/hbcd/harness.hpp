// Experiment drivers: scaling sweeps with slope fits, QDOC curves,
// fixed-budget comparisons, Monte-Carlo shot counts, and noise tables.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hbcd/analytic.hpp"
#include "hbcd/estimators.hpp"
#include "hbcd/phaseopt.hpp"

namespace hbcd {

enum class Experiment { Scaling, Qdoc, FixedBudget, MStarMonteCarlo, Noise, Perfect, Bounds };

struct ExperimentConfig {
    Experiment experiment = Experiment::Scaling;
    std::vector<double> alpha_grid;     // strictly positive, sorted descending
    std::vector<double> epsilon_list;   // subset of (0, 0.5)
    ProtocolKind protocol = ProtocolKind::Sequential;
    int depth = 1;                      // d for multi-shot protocols
    std::uint64_t seed = 0;
    int trials_l = 0;                   // 0: derive from trials_needed(eps, p_conf)
    double p_conf = 0.95;
    int n_cap = 200;
    int m_cap = 2000000;
    OptimizerConfig optimizer;
    int threads = 0;                    // 0: use HBCD_THREADS or hardware default

    // qdoc / fixed budget
    std::vector<int> qdoc_lengths{4, 8, 12, 16};
    int budget = 16;
    std::vector<int> budget_depths{2, 4, 8, 16};

    // noise
    double noise_alpha = 0.25;
    int noise_queries = 8;
    double noise_gamma = 0.0;
    std::vector<double> cqed_grid;

    // perfect
    std::vector<double> perfect_alphas;
    long perfect_cap = 1000000;

    void validate() const;
};

struct ScalingPoint {
    double alpha;
    double epsilon;
    ProtocolKind protocol;
    int depth;      // d
    int shots;      // m (1 for sequential)
    int total_queries;  // N
    double achieved;    // optimized loss (sequential) or exact error (multi-shot)
    bool found;
};

struct ScalingResult {
    std::vector<ScalingPoint> points;
    // least-squares slope of log N vs log alpha per epsilon, over found points
    std::map<double, double> slope_per_epsilon;
};

struct QdocCurve {
    std::string protocol;  // "sequential" | "multishot"
    int depth;
    int shots;
    OutcomeDistribution dist;
    std::vector<OperatingPoint> points;
};

struct MStarResult {
    int m_star;
    int trials_used;
    std::optional<int> exact_min_shots;
};

struct NoiseRow {
    double c_qed;
    double p_se;
    double eta;
    double p_s_bound;
    double p_d;
};

ScalingResult scaling_sweep(const ExperimentConfig& cfg);
std::vector<QdocCurve> qdoc_experiment(const ExperimentConfig& cfg);
std::vector<QdocCurve> fixed_budget_experiment(const ExperimentConfig& cfg);
MStarResult mstar_montecarlo(const ExperimentConfig& cfg);
std::vector<NoiseRow> noise_table(const ExperimentConfig& cfg);

// Ordinary least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

// Task count honoring cfg.threads, then HBCD_THREADS, then hardware.
int resolve_thread_count(int requested);

}  // namespace hbcd
