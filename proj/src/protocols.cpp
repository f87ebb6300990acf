#include "hbcd/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hbcd/query.hpp"
#include "hbcd/rng.hpp"

namespace hbcd {

PhaseSequence PhaseSequence::shared(double phi0, std::vector<double> phis, double psi) {
    PhaseSequence s;
    s.phi0_ = reduce_angle(phi0);
    s.phis_ = std::move(phis);
    for (auto& p : s.phis_) p = reduce_angle(p);
    s.psis_ = reduce_angle(psi);
    return s;
}

PhaseSequence PhaseSequence::per_query(double phi0, std::vector<double> phis,
                                       std::vector<double> psis) {
    if (phis.size() != psis.size())
        throw std::invalid_argument("PhaseSequence: per-query psi list length != K");
    PhaseSequence s;
    s.phi0_ = reduce_angle(phi0);
    s.phis_ = std::move(phis);
    for (auto& p : s.phis_) p = reduce_angle(p);
    for (auto& p : psis) p = reduce_angle(p);
    s.psis_ = std::move(psis);
    return s;
}

double PhaseSequence::psi_at(std::size_t k) const {
    if (const double* shared = std::get_if<double>(&psis_)) return *shared;
    return std::get<std::vector<double>>(psis_).at(k);
}

PhaseSequence PhaseSequence::concat(const PhaseSequence& tail) const {
    std::vector<double> phis = phis_;
    phis.insert(phis.end(), tail.phis_.begin(), tail.phis_.end());
    if (has_shared_psi() && tail.has_shared_psi() && shared_psi() == tail.shared_psi())
        return shared(phi0_, std::move(phis), shared_psi());
    std::vector<double> psis;
    psis.reserve(phis.size());
    for (std::size_t k = 0; k < size(); ++k) psis.push_back(psi_at(k));
    for (std::size_t k = 0; k < tail.size(); ++k) psis.push_back(tail.psi_at(k));
    return per_query(phi0_, std::move(phis), std::move(psis));
}

HBCDProblem::HBCDProblem(double alpha_, double epsilon_, DensityMatrix rho_h_)
    : alpha(alpha_), epsilon(epsilon_), rho_h(std::move(rho_h_)) {
    if (!(alpha > 0.0 && alpha < 6.283185307179586476925287))
        throw std::invalid_argument("HBCDProblem: alpha must lie in (0, 2*pi)");
    if (!(epsilon >= 0.0 && epsilon <= 0.5))
        throw std::invalid_argument("HBCDProblem: epsilon must lie in [0, 1/2]");
    if (rho_h.dim() != 2)
        throw std::invalid_argument("HBCDProblem: rho_h must be a one-qubit state");
}

HBCDProblem HBCDProblem::with_mixed_hidden(double alpha, double epsilon) {
    return HBCDProblem(alpha, epsilon, DensityMatrix::maximally_mixed(2));
}

ProtocolConfig::ProtocolConfig(ProtocolKind kind_, int n, int d, PhaseSequence seq)
    : kind(kind_), total_queries(n), depth(d), phase_sequence(std::move(seq)) {
    if (n <= 0 || d <= 0) throw std::invalid_argument("ProtocolConfig: N, d must be positive");
    switch (kind) {
        case ProtocolKind::Sequential:
            if (d != n) throw std::invalid_argument("Sequential protocol requires d = N");
            break;
        case ProtocolKind::MultiShot:
            if (n % d != 0) throw std::invalid_argument("MultiShot protocol requires N = d*m");
            break;
        case ProtocolKind::Parallel:
            if (d != 1) throw std::invalid_argument("Parallel protocol requires d = 1");
            break;
    }
}

OutcomeDistribution single_shot_distribution(const PhaseSequence& seq,
                                             const HBCDProblem& problem) {
    const std::vector<Complex> m_state{Complex{std::cos(seq.phi0()), 0.0},
                                       Complex{0.0, std::sin(seq.phi0())}};
    const DensityMatrix rho_m = DensityMatrix::pure(m_state);
    const ComplexMatrix rho0 = kron(problem.rho_h.mat, rho_m.mat);

    auto run = [&](double theta) {
        const ComplexMatrix u = sequence_unitary(theta, seq);
        const DensityMatrix rho4 = evolve(u, DensityMatrix{rho0});
        const DensityMatrix rho_meas = partial_trace_hidden(rho4);
        const double p1 = rho_meas.mat(1, 1).real();
        return std::clamp(p1, 0.0, 1.0);
    };
    return OutcomeDistribution{run(0.0), run(problem.alpha)};
}

std::vector<int> multishot_sample(const PhaseSequence& seq_d, const HBCDProblem& problem,
                                  double theta, int shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("multishot_sample: shots must be >= 1");
    const OutcomeDistribution dist = single_shot_distribution(seq_d, problem);
    const double p1 = (std::abs(theta) < 1e-15) ? dist.p1_given_0 : dist.p1_given_alpha;
    RngStream rng = derive_stream(seed, 0);
    std::vector<int> bits(shots);
    for (int k = 0; k < shots; ++k) bits[k] = rng.bernoulli(p1) ? 1 : 0;
    return bits;
}

namespace {

// Applies G (dim 2 or 4) to the listed qubits of an n-qubit density matrix,
// rho <- G rho G^dagger. Qubit 0 is the most significant index bit.
void apply_gate(ComplexMatrix& rho, int n_qubits, const std::vector<int>& qubits,
                const ComplexMatrix& g) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const std::size_t gd = g.dim();
    std::vector<std::size_t> masks(qubits.size());
    for (std::size_t i = 0; i < qubits.size(); ++i)
        masks[i] = std::size_t{1} << (n_qubits - 1 - qubits[i]);

    auto sub_index = [&](std::size_t idx) {
        std::size_t s = 0;
        for (std::size_t i = 0; i < masks.size(); ++i)
            s = (s << 1) | ((idx & masks[i]) ? 1 : 0);
        return s;
    };
    auto with_sub = [&](std::size_t idx, std::size_t s) {
        for (std::size_t i = 0; i < masks.size(); ++i) {
            const bool bit = (s >> (masks.size() - 1 - i)) & 1;
            idx = bit ? (idx | masks[i]) : (idx & ~masks[i]);
        }
        return idx;
    };

    // left multiply: rho <- G rho
    ComplexMatrix tmp(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const std::size_t sr = sub_index(r);
        for (std::size_t sp = 0; sp < gd; ++sp) {
            const Complex grs = g(sr, sp);
            if (grs == Complex{0.0, 0.0}) continue;
            const std::size_t rp = with_sub(r, sp);
            for (std::size_t c2 = 0; c2 < dim; ++c2) tmp(r, c2) += grs * rho(rp, c2);
        }
    }
    // right multiply: rho <- tmp G^dagger
    ComplexMatrix out(dim);
    for (std::size_t c2 = 0; c2 < dim; ++c2) {
        const std::size_t sc = sub_index(c2);
        for (std::size_t sp = 0; sp < gd; ++sp) {
            const Complex gcs = std::conj(g(sc, sp));
            if (gcs == Complex{0.0, 0.0}) continue;
            const std::size_t cp = with_sub(c2, sp);
            for (std::size_t r = 0; r < dim; ++r) out(r, c2) += tmp(r, cp) * gcs;
        }
    }
    rho = std::move(out);
}

// Traces out the first n_traced qubits (most significant bits).
ComplexMatrix trace_out_leading(const ComplexMatrix& rho, int n_qubits, int n_traced) {
    const std::size_t keep = std::size_t{1} << (n_qubits - n_traced);
    const std::size_t drop = std::size_t{1} << n_traced;
    ComplexMatrix r(keep);
    for (std::size_t h = 0; h < drop; ++h)
        for (std::size_t i = 0; i < keep; ++i)
            for (std::size_t j = 0; j < keep; ++j)
                r(i, j) += rho(h * keep + i, h * keep + j);
    return r;
}

}  // namespace

double parallel_depth1_invariance(int n_copies, double alpha,
                                  const std::vector<double>& psis,
                                  const std::vector<double>& phis,
                                  const ComplexMatrix& rho_m_register,
                                  const ComplexMatrix& rho_h_single) {
    if (n_copies < 1 || n_copies > 5)
        throw std::invalid_argument("parallel_depth1_invariance: N_copies must be 1..5");
    if (psis.size() != static_cast<std::size_t>(n_copies) ||
        phis.size() != static_cast<std::size_t>(n_copies))
        throw std::invalid_argument("parallel_depth1_invariance: need one (psi, phi) per copy");
    if (rho_m_register.dim() != (std::size_t{1} << n_copies))
        throw std::invalid_argument("parallel_depth1_invariance: rho_m dimension != 2^N");
    if (rho_h_single.dim() != 2)
        throw std::invalid_argument("parallel_depth1_invariance: rho_h must be one qubit");

    const int nq = 2 * n_copies;  // hidden qubits 0..N-1, measurement qubits N..2N-1
    ComplexMatrix rho = rho_h_single;
    for (int i = 1; i < n_copies; ++i) rho = detail::kron_any(rho, rho_h_single);
    rho = detail::kron_any(rho, rho_m_register);

    auto run = [&](double theta) {
        ComplexMatrix r = rho;
        for (int i = 0; i < n_copies; ++i) {
            apply_gate(r, nq, {i}, channel_unitary(theta));
            // controlled e^{i psi sz} on measurement qubit i, control hidden |1>
            ComplexMatrix cr = ComplexMatrix::identity(4);
            cr(2, 2) = std::polar(1.0, psis[i]);
            cr(3, 3) = std::polar(1.0, -psis[i]);
            apply_gate(r, nq, {i, n_copies + i}, cr);
            apply_gate(r, nq, {n_copies + i}, rot_x(phis[i]));
        }
        return trace_out_leading(r, nq, n_copies);
    };

    return trace_distance(run(0.0), run(alpha));
}

double parallel_depth1_invariance(int n_copies, double alpha,
                                  const std::vector<double>& psis,
                                  const std::vector<double>& phis, std::uint64_t seed) {
    RngStream rng = derive_stream(seed, 17);
    const std::size_t dim = std::size_t{1} << n_copies;
    std::vector<Complex> state(dim);
    for (auto& c : state) c = Complex{rng.normal(), rng.normal()};
    const ComplexMatrix rho_m = DensityMatrix::pure(state).mat;
    return parallel_depth1_invariance(n_copies, alpha, psis, phis, rho_m,
                                      DensityMatrix::maximally_mixed(2).mat);
}

}  // namespace hbcd
