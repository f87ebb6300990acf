// Closed-form results: the perfect-discrimination construction with region
// logic, the query-count lower bound, shot-count reference, unitary
// distinguishability distance, and the noisy-query error bounds.
#pragma once

#include <stdexcept>

#include "hbcd/protocols.hpp"
#include "hbcd/query.hpp"

namespace hbcd {

enum class Region { D1, D2, D3 };

struct RegionLabel {
    int j;          // multiplier in the query-count bound
    Region region;
};

struct PerfectProtocolResult {
    double alpha;
    RegionLabel region;
    double beta;               // effective per-block rotation used for the count bound
    int query_count;
    PhaseSequence phase_sequence;
    double p1_given_0;
    double p1_given_alpha;
};

struct NoiseModel {
    double eta1;   // per-query error bound, theta = 0 branch
    double eta2;   // per-query error bound, theta = alpha branch
    double gamma;  // noiseless distinguishability minimum, in [0, 1]
    double c_qed = 0.0;
    double p_se = 0.0;

    static NoiseModel from_cooperativity(double c_qed, double gamma);
};

struct SqlReference {
    double value;
    bool degenerate;  // log(1/(4 eps)) <= 0
};

struct SequenceTooLongError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Region of Theorem 1's listing; boundary points go to the lower-j region.
RegionLabel region_of(double alpha);

// Zero-error discrimination sequence for the given channel angle. Records
// the achieved exact outcome probabilities (independent of rho_h) and the
// region/beta bookkeeping backing the query-count bound j*ceil(2pi/|beta|).
PerfectProtocolResult perfect_protocol(double alpha, long block_cap = 1000000);

// Theorem-4 floor: 1 / sqrt(2 (1 - cos alpha)).
double lower_bound_queries(double alpha);

// Reference curve log(1/(4 eps)) / (4 alpha^2); order-of-magnitude only.
SqlReference sql_shot_bound(double epsilon, double alpha);

// min over pure states of |<eta| U1^dagger U2 |eta>|, from the eigenphase
// arc of U1^dagger U2.
double distance_D(const ComplexMatrix& u1, const ComplexMatrix& u2);

// Helstrom single-shot error (1 - sqrt(1 - v^2)) / 2 for overlap v in [0,1].
double helstrom_single_shot(double v);

// Noisy-query bound: s = N^2 eta1 eta2 + N eta2 + N eta1 + gamma;
// (1 - sqrt(1 - s^2))/2 when s < 1, else 1/2.
double noisy_error_bound(int n_queries, const NoiseModel& noise);

// P_se = 1 / (4 + 2 C_QED).
double spontaneous_emission(double c_qed);
// eta = sqrt(P_se).
double query_error_from_cooperativity(double c_qed);

// Smallest cooperativity with P_D = 1 - 2 P_s(N, eta(C), gamma) >= target.
double required_cooperativity(int n_queries, double p_d_target, double gamma);

}  // namespace hbcd
