#include "hbcd/phaseopt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hbcd/rng.hpp"

namespace hbcd {

void OptimizerConfig::validate() const {
    if (n_reps < 1) throw std::invalid_argument("OptimizerConfig: n_reps must be >= 1");
    if (!(gradient_step > 0.0 && gradient_step <= 1e-3))
        throw std::invalid_argument("OptimizerConfig: gradient_step must lie in (0, 1e-3]");
    if (!(convergence_tol > 0.0))
        throw std::invalid_argument("OptimizerConfig: convergence_tol must be positive");
}

namespace {

std::vector<double> pack(const PhaseSequence& seq) {
    std::vector<double> x;
    x.push_back(seq.phi0());
    for (double p : seq.phis()) x.push_back(p);
    if (seq.has_shared_psi()) {
        x.push_back(seq.shared_psi());
    } else {
        for (double p : seq.per_query_psis()) x.push_back(p);
    }
    return x;
}

PhaseSequence unpack(const std::vector<double>& x, std::size_t k, bool shared) {
    const double phi0 = x[0];
    std::vector<double> phis(x.begin() + 1, x.begin() + 1 + k);
    if (shared) return PhaseSequence::shared(phi0, std::move(phis), x[k + 1]);
    std::vector<double> psis(x.begin() + 1 + k, x.begin() + 1 + 2 * k);
    return PhaseSequence::per_query(phi0, std::move(phis), std::move(psis));
}

struct LbfgsReport {
    double value;
    int iterations;
};

// Limited-memory BFGS with Armijo backtracking. f and g are callbacks over
// the packed angle vector.
template <typename F, typename G>
LbfgsReport lbfgs_minimize(std::vector<double>& x, F&& f, G&& g, int max_iter,
                           double grad_tol) {
    const std::size_t n = x.size();
    const int history = 8;
    std::vector<std::vector<double>> ss, ys;
    std::vector<double> rhos;

    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double r = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
        return r;
    };

    double fx = f(x);
    std::vector<double> grad = g(x);
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        if (std::sqrt(dot(grad, grad)) <= grad_tol) break;

        // two-loop recursion
        std::vector<double> q = grad;
        std::vector<double> alpha_coef(ss.size());
        for (int i = static_cast<int>(ss.size()) - 1; i >= 0; --i) {
            alpha_coef[i] = rhos[i] * dot(ss[i], q);
            for (std::size_t j = 0; j < n; ++j) q[j] -= alpha_coef[i] * ys[i][j];
        }
        double gamma = 1.0;
        if (!ss.empty()) {
            const double yy = dot(ys.back(), ys.back());
            if (yy > 0.0) gamma = dot(ss.back(), ys.back()) / yy;
        }
        for (auto& v : q) v *= gamma;
        for (std::size_t i = 0; i < ss.size(); ++i) {
            const double b = rhos[i] * dot(ys[i], q);
            for (std::size_t j = 0; j < n; ++j) q[j] += ss[i][j] * (alpha_coef[i] - b);
        }
        std::vector<double> dir(n);
        for (std::size_t j = 0; j < n; ++j) dir[j] = -q[j];
        double slope = dot(dir, grad);
        if (slope >= 0.0) {
            ss.clear(); ys.clear(); rhos.clear();
            for (std::size_t j = 0; j < n; ++j) dir[j] = -grad[j];
            slope = -dot(grad, grad);
        }

        // Armijo backtracking
        double step = 1.0;
        std::vector<double> xn(n);
        double fn = fx;
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt) {
            for (std::size_t j = 0; j < n; ++j) xn[j] = x[j] + step * dir[j];
            fn = f(xn);
            if (fn <= fx + 1e-4 * step * slope) { moved = true; break; }
            step *= 0.5;
        }
        if (!moved) break;

        std::vector<double> gn = g(xn);
        std::vector<double> s(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = xn[j] - x[j];
            y[j] = gn[j] - grad[j];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y))) {
            ss.push_back(std::move(s));
            ys.push_back(std::move(y));
            rhos.push_back(1.0 / sy);
            if (static_cast<int>(ss.size()) > history) {
                ss.erase(ss.begin());
                ys.erase(ys.begin());
                rhos.erase(rhos.begin());
            }
        }
        x = std::move(xn);
        fx = fn;
        grad = std::move(gn);
    }
    return {fx, iter};
}

}  // namespace

double loss(const PhaseSequence& seq, const HBCDProblem& problem) {
    const OutcomeDistribution d = single_shot_distribution(seq, problem);
    const double r = 1.0 - d.p1_given_alpha + d.p1_given_0;
    return r * r;
}

std::vector<double> loss_gradient(const PhaseSequence& seq, const HBCDProblem& problem,
                                  double step) {
    if (!(step > 0.0 && step <= 1e-3))
        throw std::invalid_argument("loss_gradient: step must lie in (0, 1e-3]");
    std::vector<double> x = pack(seq);
    const std::size_t k = seq.size();
    const bool shared = seq.has_shared_psi();
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + step;
        const double fp = loss(unpack(x, k, shared), problem);
        x[i] = x0 - step;
        const double fm = loss(unpack(x, k, shared), problem);
        x[i] = x0;
        grad[i] = (fp - fm) / (2.0 * step);
    }
    return grad;
}

OptimizationResult optimize_phases(int K, const HBCDProblem& problem,
                                   const OptimizerConfig& cfg) {
    if (K < 1) throw std::invalid_argument("optimize_phases: K must be >= 1");
    cfg.validate();
    const std::size_t k = static_cast<std::size_t>(K);
    const bool shared = !cfg.per_query_psi;

    auto f = [&](const std::vector<double>& x) { return loss(unpack(x, k, shared), problem); };
    auto g = [&](const std::vector<double>& x) {
        return loss_gradient(unpack(x, k, shared), problem, cfg.gradient_step);
    };

    OptimizationResult out;
    out.best_loss = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < cfg.n_reps; ++rep) {
        RngStream rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(rep));
        std::vector<double> x(shared ? k + 2 : 2 * k + 1, 0.0);
        x[0] = 0.78539816339744831;  // pi/4
        x[k] = 0.78539816339744831;
        if (shared) {
            x[k + 1] = reduce_angle(rng.normal());
        } else {
            for (std::size_t i = k + 1; i < x.size(); ++i) x[i] = reduce_angle(rng.normal());
        }
        const LbfgsReport rep_out =
            lbfgs_minimize(x, f, g, cfg.max_iterations, cfg.convergence_tol);
        const PhaseSequence seq = unpack(x, k, shared);
        const double final_loss = loss(seq, problem);
        out.losses_per_restart.push_back(final_loss);
        out.iterations.push_back(rep_out.iterations);
        if (final_loss < out.best_loss) {
            out.best_loss = final_loss;
            out.best_phi = seq;
        }
    }
    return out;
}

std::optional<int> min_queries_sequential(const HBCDProblem& problem,
                                          const OptimizerConfig& cfg, int n_cap) {
    if (!(problem.epsilon > 0.0 && problem.epsilon < 0.5))
        throw std::invalid_argument("min_queries_sequential: epsilon must lie in (0, 0.5)");
    const double target = 4.0 * problem.epsilon * problem.epsilon;
    for (int k = 1; k <= n_cap; ++k) {
        OptimizerConfig per_k = cfg;
        std::uint64_t s = cfg.seed;
        per_k.seed = splitmix64(s) ^ static_cast<std::uint64_t>(k);
        const OptimizationResult r = optimize_phases(k, problem, per_k);
        if (r.best_loss <= target) return k;
    }
    return std::nullopt;
}

}  // namespace hbcd
