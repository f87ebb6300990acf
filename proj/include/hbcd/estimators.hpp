// Decision rules and exact error probabilities over the binomial
// sufficient statistic.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hbcd/protocols.hpp"

namespace hbcd {

struct ShotRecord {
    int m;   // number of shots
    int y1;  // count of 1-outcomes

    ShotRecord(int m_, int y1_) : m(m_), y1(y1_) {
        if (m < 1 || y1 < 0 || y1 > m)
            throw std::invalid_argument("ShotRecord: need 0 <= Y1 <= m, m >= 1");
    }
    static ShotRecord from_bits(const std::vector<int>& bits);
};

enum class Estimate { Zero, Alpha };

// Lambda-ties go to 0 (the maximum-likelihood convention of the error
// analysis) unless AlphaOnTie is requested.
enum class TieRule { ZeroOnTie, AlphaOnTie };

struct OperatingPoint {
    double eta;  // LRT threshold; +infinity for the never-decide-alpha rule
    double p_false_alarm;
    double p_detect;
};

struct InfeasibleError : std::domain_error {
    using std::domain_error::domain_error;
};

// Majority vote: alpha if 2*Y1 > m, else 0 (ties to 0).
double majority_vote(const ShotRecord& record, double alpha);

// Likelihood-ratio test in log space: alpha iff Lambda >= eta, with the
// tie rule deciding the Lambda == eta boundary. Degenerate probabilities
// are handled with extended-real log-likelihoods.
Estimate lrt_decide(const ShotRecord& record, const OutcomeDistribution& dist,
                    double eta, TieRule tie_rule = TieRule::ZeroOnTie);

// Exact Bayes error under the uniform prior, summing binomial probabilities
// of Y1 over the decision regions of lrt_decide.
double exact_error_prob(int m, const OutcomeDistribution& dist, double eta,
                        TieRule tie_rule = TieRule::ZeroOnTie);

// Smallest m with exact_error_prob(m, dist, 1) <= epsilon, up to m_cap.
// Empty when no m <= m_cap suffices; InfeasibleError when p10 == p1alpha.
std::optional<int> min_shots(double epsilon, const OutcomeDistribution& dist, int m_cap);

// The m+2 deterministic operating points from sweeping the Y1 threshold,
// ascending false-alarm probability, endpoints (0,0) and (1,1) included.
std::vector<OperatingPoint> qdoc_points(int m, const OutcomeDistribution& dist);

// Smallest L with 1 - (1-epsilon)^L >= p_conf.
int trials_needed(double epsilon, double p_conf);

// log of the binomial pmf with the 0*log(0) = 0 convention.
double log_binom_pmf(int m, int k, double p);

}  // namespace hbcd
