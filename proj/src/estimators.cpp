#include "hbcd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hbcd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dist(const OutcomeDistribution& d) {
    if (std::isnan(d.p1_given_0) || std::isnan(d.p1_given_alpha))
        throw std::invalid_argument("OutcomeDistribution: NaN probability");
    if (d.p1_given_0 < -1e-12 || d.p1_given_0 > 1.0 + 1e-12 ||
        d.p1_given_alpha < -1e-12 || d.p1_given_alpha > 1.0 + 1e-12)
        throw std::invalid_argument("OutcomeDistribution: probability outside [0, 1]");
}

// log L(y; p) for Y1 = k out of m, ignoring the binomial coefficient
// (common to both hypotheses). -inf when the outcome is impossible.
double log_likelihood(int m, int k, double p) {
    double r = 0.0;
    if (k > 0) r += (p <= 0.0) ? -kInf : k * std::log(p);
    if (m - k > 0) r += (p >= 1.0) ? -kInf : (m - k) * std::log(1.0 - p);
    return r;
}

}  // namespace

ShotRecord ShotRecord::from_bits(const std::vector<int>& bits) {
    int y1 = 0;
    for (int b : bits) y1 += (b != 0);
    return ShotRecord(static_cast<int>(bits.size()), y1);
}

double majority_vote(const ShotRecord& record, double alpha) {
    return (2 * record.y1 > record.m) ? alpha : 0.0;
}

Estimate lrt_decide(const ShotRecord& record, const OutcomeDistribution& dist,
                    double eta, TieRule tie_rule) {
    check_dist(dist);
    if (std::isnan(eta) || eta < 0.0)
        throw std::invalid_argument("lrt_decide: eta must be a nonnegative real or +inf");
    const double la = log_likelihood(record.m, record.y1, dist.p1_given_alpha);
    const double l0 = log_likelihood(record.m, record.y1, dist.p1_given_0);
    const double log_eta = std::log(eta);  // log(0) = -inf, log(inf) = inf

    double log_lambda;
    if (std::isinf(la) && std::isinf(l0)) log_lambda = 0.0;  // both impossible: tie
    else if (std::isinf(la)) log_lambda = -kInf;
    else if (std::isinf(l0)) log_lambda = kInf;
    else log_lambda = la - l0;

    if (log_lambda > log_eta) return Estimate::Alpha;
    if (log_lambda < log_eta) return Estimate::Zero;
    return tie_rule == TieRule::AlphaOnTie ? Estimate::Alpha : Estimate::Zero;
}

double log_binom_pmf(int m, int k, double p) {
    if (p <= 0.0) return (k == 0) ? 0.0 : -kInf;
    if (p >= 1.0) return (k == m) ? 0.0 : -kInf;
    return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0) +
           k * std::log(p) + (m - k) * std::log(1.0 - p);
}

double exact_error_prob(int m, const OutcomeDistribution& dist, double eta,
                        TieRule tie_rule) {
    if (m < 1) throw std::invalid_argument("exact_error_prob: m must be >= 1");
    check_dist(dist);
    double err_alpha_given_0 = 0.0;  // P(decide alpha | theta = 0)
    double err_zero_given_a = 0.0;   // P(decide 0 | theta = alpha)
    for (int y1 = 0; y1 <= m; ++y1) {
        const Estimate e = lrt_decide(ShotRecord(m, y1), dist, eta, tie_rule);
        if (e == Estimate::Alpha)
            err_alpha_given_0 += std::exp(log_binom_pmf(m, y1, dist.p1_given_0));
        else
            err_zero_given_a += std::exp(log_binom_pmf(m, y1, dist.p1_given_alpha));
    }
    return 0.5 * (err_alpha_given_0 + err_zero_given_a);
}

std::optional<int> min_shots(double epsilon, const OutcomeDistribution& dist, int m_cap) {
    check_dist(dist);
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw std::invalid_argument("min_shots: epsilon must lie in (0, 0.5)");
    if (dist.p1_given_0 == dist.p1_given_alpha)
        throw InfeasibleError("min_shots: indistinguishable outcome distribution");
    for (int m = 1; m <= m_cap; ++m)
        if (exact_error_prob(m, dist, 1.0) <= epsilon) return m;
    return std::nullopt;
}

std::vector<OperatingPoint> qdoc_points(int m, const OutcomeDistribution& dist) {
    if (m < 1) throw std::invalid_argument("qdoc_points: m must be >= 1");
    check_dist(dist);
    // survival[k] = P(Y1 >= k)
    auto survival = [&](double p) {
        std::vector<double> s(m + 2, 0.0);
        for (int k = m; k >= 0; --k) s[k] = s[k + 1] + std::exp(log_binom_pmf(m, k, p));
        return s;
    };
    const auto sf = survival(dist.p1_given_0);
    const auto sd = survival(dist.p1_given_alpha);
    std::vector<OperatingPoint> pts;
    pts.reserve(m + 2);
    for (int k = m + 1; k >= 0; --k) {
        double eta;
        if (k == m + 1) {
            eta = kInf;
        } else {
            const double llr = log_likelihood(m, k, dist.p1_given_alpha) -
                               log_likelihood(m, k, dist.p1_given_0);
            eta = std::exp(llr);
        }
        pts.push_back(OperatingPoint{eta, std::min(1.0, sf[k]), std::min(1.0, sd[k])});
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const OperatingPoint& a, const OperatingPoint& b) {
                         return a.p_false_alarm < b.p_false_alarm;
                     });
    return pts;
}

int trials_needed(double epsilon, double p_conf) {
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw std::invalid_argument("trials_needed: epsilon must lie in (0, 0.5)");
    if (!(p_conf > 0.5 && p_conf < 1.0))
        throw std::invalid_argument("trials_needed: p_conf must lie in (0.5, 1)");
    const int start = std::max(
        1, static_cast<int>(std::floor(std::log1p(-p_conf) / std::log1p(-epsilon))) - 2);
    for (int l = start;; ++l)
        if (1.0 - std::pow(1.0 - epsilon, l) >= p_conf) return l;
}

}  // namespace hbcd
