#pragma once

#include <utility>
#include <vector>

#include "cmp/expfam.hpp"

namespace cmp {

// Joint count-category harmonium. interaction has one row per nonzero
// category (row j-1 belongs to component j); the row of component 0 is
// implicitly zero.
struct HarmoniumParams {
    NaturalParams bias_n;        // Poisson, length m_N
    NaturalParams bias_c;        // Categorical, length m_C
    Eigen::MatrixXd interaction; // (m_C, m_N)

    Eigen::Index neuron_count() const { return bias_n.values.size(); }
    Eigen::Index latent_dim() const { return bias_c.values.size(); }
};

// Weighted-sum form of the same model: m_C + 1 Poisson components plus
// categorical weights (component 0's weight implicit).
struct MixtureParams {
    MeanParams weights;                    // Categorical, length m_C
    std::vector<NaturalParams> components; // m_C + 1 Poisson vectors

    Eigen::Index latent_dim() const { return weights.values.size(); }
};

// Mean coordinates of the harmonium; cross row j holds E[n * 1{c=j}].
struct HarmoniumMeans {
    MeanParams mean_n;     // Poisson, E[n]
    MeanParams mean_c;     // Categorical, component probabilities j >= 1
    Eigen::MatrixXd cross; // (m_C, m_N)
};

struct HarmoniumGradient {
    Eigen::VectorXd bias_n;
    Eigen::VectorXd bias_c;
    Eigen::MatrixXd interaction;
};

// Natural parameters of every component, stacked: row j is
// bias_n + (j > 0 ? interaction row j-1 : 0).
Eigen::MatrixXd component_naturals(const HarmoniumParams &h);

MixtureParams harmonium_to_mixture(const HarmoniumParams &h);
HarmoniumParams mixture_to_harmonium(const MixtureParams &m);

// Harmonium-form joint density over (counts, category), normalized through
// psi_XC = psi_N(bias_n) + psi_C(theta*_C).
double joint_log_density(const CountVector &n, Eigen::Index j,
                         const HarmoniumParams &h);

// log sum_j exp(joint_log_density(n, j, h)).
double marginal_log_density(const CountVector &n, const HarmoniumParams &h);

// Component responsibilities given counts, from the joint log densities.
MeanParams posterior(const CountVector &n, const HarmoniumParams &h);

HarmoniumMeans harmonium_means(const HarmoniumParams &h);

// Inverse of harmonium_means. Requires interior weights and strictly
// positive recovered rates.
HarmoniumParams harmonium_means_to_params(const HarmoniumMeans &m);

// One exact EM iteration: per-sample posteriors, averaged sufficient
// statistics, mean-to-natural conversion. Throws DegenerateComponentError
// when an averaged responsibility vanishes.
HarmoniumParams em_step(const std::vector<CountVector> &data,
                        const HarmoniumParams &h);

// Stochastic log-likelihood gradients of the marginal density at one sample.
HarmoniumGradient ll_gradients(const CountVector &n, const HarmoniumParams &h);

// Ancestral sample: category from the mixture weights, counts from that
// component's rates.
std::pair<Eigen::Index, CountVector> sample_joint(const HarmoniumParams &h,
                                                  Rng &rng);

} // namespace cmp
