#include "hbcd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hbcd/rng.hpp"

namespace hbcd {

void ExperimentConfig::validate() const {
    if (!std::is_sorted(alpha_grid.rbegin(), alpha_grid.rend()))
        throw std::invalid_argument("ExperimentConfig: alpha_grid must be sorted descending");
    for (double a : alpha_grid)
        if (!(a > 0.0)) throw std::invalid_argument("ExperimentConfig: alpha_grid entries must be positive");
    for (double e : epsilon_list)
        if (!(e > 0.0 && e < 0.5))
            throw std::invalid_argument("ExperimentConfig: epsilon_list entries must lie in (0, 0.5)");
    optimizer.validate();
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HBCD_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

namespace {

// Runs tasks [0, count) on up to n_threads workers; results land in
// caller-indexed slots, so assembly is order-independent.
template <typename Fn>
void parallel_for(int count, int n_threads, Fn&& fn) {
    if (count <= 0) return;
    n_threads = std::max(1, std::min(n_threads, count));
    if (n_threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ols_slope: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i];
        sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw std::invalid_argument("ols_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

ScalingResult scaling_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.protocol == ProtocolKind::Parallel)
        throw std::invalid_argument("scaling_sweep: protocol must be Sequential or MultiShot");
    struct Task { double alpha; double eps; };
    std::vector<Task> tasks;
    for (double eps : cfg.epsilon_list)
        for (double a : cfg.alpha_grid) tasks.push_back({a, eps});

    ScalingResult out;
    out.points.resize(tasks.size());
    const int threads = resolve_thread_count(cfg.threads);

    parallel_for(static_cast<int>(tasks.size()), threads, [&](int i) {
        const Task& t = tasks[i];
        OptimizerConfig opt = cfg.optimizer;
        std::uint64_t s = cfg.seed;
        opt.seed = splitmix64(s) ^ (0x6a09e667f3bcc909ULL * (i + 1));
        ScalingPoint pt{t.alpha, t.eps, cfg.protocol, 0, 0, 0, 0.0, false};
        if (cfg.protocol == ProtocolKind::Sequential) {
            HBCDProblem problem = HBCDProblem::with_mixed_hidden(t.alpha, t.eps);
            const auto n = min_queries_sequential(problem, opt, cfg.n_cap);
            if (n) {
                OptimizerConfig per_k = opt;
                std::uint64_t s2 = opt.seed;
                per_k.seed = splitmix64(s2) ^ static_cast<std::uint64_t>(*n);
                const auto res = optimize_phases(*n, problem, per_k);
                pt.depth = *n;
                pt.shots = 1;
                pt.total_queries = *n;
                pt.achieved = res.best_loss;
                pt.found = true;
            }
        } else {
            HBCDProblem problem = HBCDProblem::with_mixed_hidden(t.alpha, t.eps);
            const auto res = optimize_phases(cfg.depth, problem, opt);
            const OutcomeDistribution dist = single_shot_distribution(res.best_phi, problem);
            try {
                const auto m = min_shots(t.eps, dist, cfg.m_cap);
                if (m) {
                    pt.depth = cfg.depth;
                    pt.shots = *m;
                    pt.total_queries = cfg.depth * (*m);
                    pt.achieved = exact_error_prob(*m, dist, 1.0);
                    pt.found = true;
                }
            } catch (const InfeasibleError&) {
                // left unfound; excluded from the fit
            }
        }
        out.points[i] = pt;
    });

    for (double eps : cfg.epsilon_list) {
        std::vector<double> lx, ly;
        for (const auto& p : out.points)
            if (p.found && p.epsilon == eps) {
                lx.push_back(std::log(p.alpha));
                ly.push_back(std::log(static_cast<double>(p.total_queries)));
            }
        if (lx.size() >= 2) out.slope_per_epsilon[eps] = ols_slope(lx, ly);
    }
    return out;
}

namespace {

QdocCurve make_curve(const std::string& name, int depth, int shots, double alpha,
                     const OptimizerConfig& opt) {
    HBCDProblem problem = HBCDProblem::with_mixed_hidden(alpha, 0.05);
    const auto res = optimize_phases(depth, problem, opt);
    const OutcomeDistribution dist = single_shot_distribution(res.best_phi, problem);
    QdocCurve c{name, depth, shots, dist, qdoc_points(shots, dist)};
    return c;
}

}  // namespace

std::vector<QdocCurve> qdoc_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.alpha_grid.empty())
        throw std::invalid_argument("qdoc_experiment: alpha_grid must not be empty");
    const double alpha = cfg.alpha_grid.front();
    std::vector<QdocCurve> curves(cfg.qdoc_lengths.size());
    const int threads = resolve_thread_count(cfg.threads);
    parallel_for(static_cast<int>(cfg.qdoc_lengths.size()), threads, [&](int i) {
        const int len = cfg.qdoc_lengths[i];
        OptimizerConfig opt = cfg.optimizer;
        std::uint64_t s = cfg.seed;
        opt.seed = splitmix64(s) ^ (0x243f6a8885a308d3ULL * (i + 1));
        if (cfg.protocol == ProtocolKind::Sequential) {
            curves[i] = make_curve("sequential", len, 1, alpha, opt);
        } else {
            if (len % cfg.depth != 0)
                throw std::invalid_argument("qdoc_experiment: N not divisible by depth");
            curves[i] = make_curve("multishot", cfg.depth, len / cfg.depth, alpha, opt);
        }
    });
    return curves;
}

std::vector<QdocCurve> fixed_budget_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.alpha_grid.empty())
        throw std::invalid_argument("fixed_budget_experiment: alpha_grid must not be empty");
    const double alpha = cfg.alpha_grid.front();
    std::vector<int> depths;
    for (int d : cfg.budget_depths)
        if (d >= 1 && cfg.budget % d == 0) depths.push_back(d);
    std::vector<QdocCurve> curves(depths.size());
    const int threads = resolve_thread_count(cfg.threads);
    parallel_for(static_cast<int>(depths.size()), threads, [&](int i) {
        const int d = depths[i];
        OptimizerConfig opt = cfg.optimizer;
        std::uint64_t s = cfg.seed;
        opt.seed = splitmix64(s) ^ (0x452821e638d01377ULL * (i + 1));
        if (d == cfg.budget)
            curves[i] = make_curve("sequential", d, 1, alpha, opt);
        else
            curves[i] = make_curve("multishot", d, cfg.budget / d, alpha, opt);
    });
    return curves;
}

MStarResult mstar_montecarlo(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.alpha_grid.empty() || cfg.epsilon_list.empty())
        throw std::invalid_argument("mstar_montecarlo: need alpha and epsilon");
    const double alpha = cfg.alpha_grid.front();
    const double eps = cfg.epsilon_list.front();
    const int trials = cfg.trials_l > 0 ? cfg.trials_l : trials_needed(eps, cfg.p_conf);

    HBCDProblem problem = HBCDProblem::with_mixed_hidden(alpha, eps);
    OptimizerConfig opt = cfg.optimizer;
    opt.seed = cfg.seed;
    const auto res = optimize_phases(cfg.depth, problem, opt);
    const OutcomeDistribution dist = single_shot_distribution(res.best_phi, problem);

    std::optional<int> exact;
    try {
        exact = min_shots(eps, dist, cfg.m_cap);
    } catch (const InfeasibleError&) {
        exact = std::nullopt;
    }

    RngStream rng = derive_stream(cfg.seed, 0xabcdefULL);
    for (int m = 1; m <= cfg.m_cap; ++m) {
        bool all_correct = true;
        for (int t = 0; t < trials && all_correct; ++t) {
            const bool truth_alpha = rng.bernoulli(0.5);
            const double p1 = truth_alpha ? dist.p1_given_alpha : dist.p1_given_0;
            int y1 = 0;
            for (int s = 0; s < m; ++s) y1 += rng.bernoulli(p1) ? 1 : 0;
            const Estimate est = lrt_decide(ShotRecord(m, y1), dist, 1.0);
            const bool est_alpha = est == Estimate::Alpha;
            if (est_alpha != truth_alpha) all_correct = false;
        }
        if (all_correct) return MStarResult{m, trials, exact};
    }
    throw ConstructionError("mstar_montecarlo: no m <= m_cap succeeded");
}

std::vector<NoiseRow> noise_table(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> grid = cfg.cqed_grid;
    if (grid.empty()) {
        for (double c : {0.0, 25.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 800.0})
            grid.push_back(c);
    }
    std::vector<NoiseRow> rows;
    rows.reserve(grid.size() + 1);
    for (double c : grid) {
        const NoiseModel nm = NoiseModel::from_cooperativity(c, cfg.noise_gamma);
        const double ps = noisy_error_bound(cfg.noise_queries, nm);
        rows.push_back(NoiseRow{c, nm.p_se, nm.eta1, ps, 1.0 - 2.0 * ps});
    }
    // noiseless reference row (eta = 0)
    const NoiseModel clean{0.0, 0.0, cfg.noise_gamma, 0.0, 0.0};
    const double ps = noisy_error_bound(cfg.noise_queries, clean);
    rows.push_back(NoiseRow{std::numeric_limits<double>::infinity(), 0.0, 0.0, ps,
                            1.0 - 2.0 * ps});
    return rows;
}

}  // namespace hbcd
