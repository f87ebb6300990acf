// Simulation of the discrimination protocols: single-shot sequential
// distributions, i.i.d. multi-shot sampling, and the depth-1 parallel
// invariance check.
#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hbcd/qcore.hpp"

namespace hbcd {

// Tunable knobs of a protocol: state-prep rotation phi0, per-query x-rotation
// phases phi_1..phi_K, and the controlled phase psi (shared or per query).
class PhaseSequence {
public:
    static PhaseSequence shared(double phi0, std::vector<double> phis, double psi);
    static PhaseSequence per_query(double phi0, std::vector<double> phis,
                                   std::vector<double> psis);

    std::size_t size() const { return phis_.size(); }  // K
    double phi0() const { return phi0_; }
    const std::vector<double>& phis() const { return phis_; }
    double psi_at(std::size_t k) const;
    bool has_shared_psi() const { return std::holds_alternative<double>(psis_); }
    double shared_psi() const { return std::get<double>(psis_); }
    const std::vector<double>& per_query_psis() const {
        return std::get<std::vector<double>>(psis_);
    }

    // concatenation: this followed by tail
    PhaseSequence concat(const PhaseSequence& tail) const;

private:
    PhaseSequence() = default;
    double phi0_ = 0.0;
    std::vector<double> phis_;
    std::variant<double, std::vector<double>> psis_;
};

struct HBCDProblem {
    double alpha;          // in (0, 2*pi)
    double epsilon;        // in [0, 1/2]
    DensityMatrix rho_h;   // initial hidden-qubit state

    HBCDProblem(double alpha_, double epsilon_, DensityMatrix rho_h_);
    static HBCDProblem with_mixed_hidden(double alpha, double epsilon);
};

enum class ProtocolKind { Sequential, MultiShot, Parallel };

struct ProtocolConfig {
    ProtocolKind kind;
    int total_queries;      // N
    int depth;              // d; Sequential => d = N, MultiShot => N = d*m, Parallel => d = 1
    PhaseSequence phase_sequence;
    bool computational_basis_measurement = true;

    ProtocolConfig(ProtocolKind kind_, int n, int d, PhaseSequence seq);
    int shots() const { return total_queries / depth; }
};

struct OutcomeDistribution {
    double p1_given_0;
    double p1_given_alpha;
};

// Exact outcome distribution of one shot: prepare rho_m = Rx(phi0)|0><0|Rx^def,
// run the sequence at theta in {0, alpha}, trace out the hidden qubit, and
// read <1|rho_M|1>. Probabilities clamped to [0, 1].
OutcomeDistribution single_shot_distribution(const PhaseSequence& seq,
                                             const HBCDProblem& problem);

// m i.i.d. Bernoulli outcomes at the stated theta; the hidden state is
// freshly initialized to rho_h each shot. Reproducible from the seed.
std::vector<int> multishot_sample(const PhaseSequence& seq_d, const HBCDProblem& problem,
                                  double theta, int shots, std::uint64_t seed);

// Trace distance between the reduced measurement-register states for
// theta = 0 and theta = alpha under N depth-1 parallel queries with
// rho_h = I/2 per copy. The measurement register may hold any entangled
// initial state. N_copies capped at 5 (dense 2^(2N) simulation).
double parallel_depth1_invariance(int n_copies, double alpha,
                                  const std::vector<double>& psis,
                                  const std::vector<double>& phis,
                                  const ComplexMatrix& rho_m_register,
                                  const ComplexMatrix& rho_h_single);

// Convenience: seeded Haar-ish random entangled pure rho_m, rho_h = I/2.
double parallel_depth1_invariance(int n_copies, double alpha,
                                  const std::vector<double>& psis,
                                  const std::vector<double>& phis, std::uint64_t seed);

}  // namespace hbcd
