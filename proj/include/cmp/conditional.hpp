#pragma once

#include <vector>

#include "cmp/mixture.hpp"

namespace cmp {

// Orientation on the half-circle; reduced modulo pi on construction.
struct Stimulus {
    double angle = 0.0;

    Stimulus() = default;
    explicit Stimulus(double radians);
};

// (cos 2z, sin 2z); unit norm, period pi.
Eigen::Vector2d encode_stimulus(Stimulus z);

// Harmonium plus a stimulus link: the count bias at stimulus z is
// bias_n + link * s_Z(z).
struct CmpParams {
    HarmoniumParams harmonium;
    Eigen::MatrixXd link; // (m_N, 2)

    Eigen::Index neuron_count() const { return harmonium.neuron_count(); }
    Eigen::Index latent_dim() const { return harmonium.latent_dim(); }
};

struct SpikeDataset {
    std::vector<CountVector> counts;
    std::vector<Stimulus> stimuli;

    std::size_t size() const { return counts.size(); }
    Eigen::Index neuron_count() const
    {
        return counts.empty() ? 0 : counts.front().size();
    }
};

void validate_dataset(const SpikeDataset &d);

NaturalParams conditional_bias(const CmpParams &p, Stimulus z);

// The z-conditioned joint model: same latent structure, shifted count bias.
HarmoniumParams conditioned_harmonium(const CmpParams &p, Stimulus z);

// Fully evaluated mixture view at one stimulus; the working representation
// for densities, gradients, curves and moments.
struct ConditionedMixture {
    Eigen::MatrixXd comp_naturals; // (m_C+1, m_N): theta*_j(z)
    Eigen::MatrixXd comp_rates;    // exp(comp_naturals)
    Eigen::VectorXd comp_psi;      // psi_N per component (row sums)
    Eigen::VectorXd log_weights;   // (m_C+1), normalized
    Eigen::VectorXd weights;       // exp(log_weights)

    Eigen::VectorXd mean_rate() const { return comp_rates.transpose() * weights; }
};

ConditionedMixture condition(const CmpParams &p, Stimulus z);

// Cache of conditioned states keyed by exact stimulus angle. Datasets carry
// few distinct stimuli, so conditioning once per chunk removes most of the
// exp() cost in trial loops. Single-threaded use only (one per chunk).
class ConditionCache {
public:
    explicit ConditionCache(const CmpParams &p)
        : params_(p)
    {
    }

    const ConditionedMixture &at(Stimulus z)
    {
        for (const auto &entry : entries_)
            if (entry.first == z.angle)
                return entry.second;
        entries_.emplace_back(z.angle, condition(params_, z));
        return entries_.back().second;
    }

private:
    const CmpParams &params_;
    std::vector<std::pair<double, ConditionedMixture>> entries_;
};

double conditional_log_density(const CountVector &n, Stimulus z,
                               const CmpParams &p);
double conditional_log_density(const CountVector &n,
                               const ConditionedMixture &cm);

// Mean log density per trial (not the sum), parallel over trials with a
// deterministic reduction.
double conditional_log_likelihood(const SpikeDataset &d, const CmpParams &p);
double conditional_log_likelihood_serial(const SpikeDataset &d,
                                         const CmpParams &p);

// Posterior over components given (n, z). Independent of z by construction;
// see posterior() in mixture.
MeanParams responsibilities(const CountVector &n, Stimulus z,
                            const CmpParams &p);
Eigen::VectorXd full_responsibilities(const CountVector &n,
                                      const ConditionedMixture &cm);

// Row per grid stimulus, full weight vector of the conditioned mixture.
Eigen::MatrixXd weight_curve(const CmpParams &p,
                             const std::vector<Stimulus> &grid);

// E[N_k | z] per grid stimulus and neuron.
Eigen::MatrixXd tuning_curves(const CmpParams &p,
                              const std::vector<Stimulus> &grid);

struct ConditionedMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd correlation;
};

// Stimulus-conditioned first and second moments of the count vector.
// Zero-variance entries yield correlation 0 plus a warning.
ConditionedMoments conditioned_moments(const CmpParams &p, Stimulus z);

// Gradient blocks mirroring CmpParams; also the storage layout for Adam
// moments.
struct CmpGradient {
    Eigen::VectorXd bias_n;      // m_N
    Eigen::VectorXd bias_c;      // m_C
    Eigen::MatrixXd interaction; // (m_C, m_N)
    Eigen::MatrixXd link;        // (m_N, 2)

    static CmpGradient zeros(Eigen::Index m_n, Eigen::Index m_c);
    CmpGradient &operator+=(const CmpGradient &o);
    CmpGradient &operator*=(double s);
    bool all_finite() const;
};

// Gradient at one trial from a precomputed conditioned state; frozen_resp,
// when non-null, replaces the posterior (the M-step surrogate gradient).
CmpGradient trial_gradient(const CountVector &n, Stimulus z,
                           const ConditionedMixture &cm, Eigen::Index m_c,
                           const Eigen::VectorXd *frozen_resp = nullptr);

// Log-likelihood gradient of the conditioned marginal at one trial
// (Eqs. of the harmonium gradient plus the link block).
CmpGradient conditional_ll_gradients(const CountVector &n, Stimulus z,
                                     const CmpParams &p);

// Same expressions with the responsibilities frozen to resp_full
// (length m_C+1); the M-step surrogate gradient.
CmpGradient surrogate_gradients(const CountVector &n, Stimulus z,
                                const CmpParams &p,
                                const Eigen::VectorXd &resp_full);

// Value of the per-trial M-step objective at frozen responsibilities.
double surrogate_value(const CountVector &n, Stimulus z, const CmpParams &p,
                       const Eigen::VectorXd &resp_full);

} // namespace cmp
