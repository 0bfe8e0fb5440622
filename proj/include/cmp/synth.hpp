#pragma once

#include "cmp/conditional.hpp"

namespace cmp {

// Ground-truth generator settings. Preferred stimuli are uniform on the
// half-circle; precisions and gains are log-normal with the given
// distribution means and shared log-space sigma.
struct GroundTruthSpec {
    Eigen::Index m_n = 20;
    Eigen::Index m_c = 7;
    std::uint64_t pref_stim_seed = 0;
    double precision_mean = 0.8;
    double gain_mean = 2.0;
    double log_sigma = 0.5;
    double weight_bias_scale = 1.0;
};

struct SamplingPlan {
    int stimulus_count = 8;
    int trials_per_stimulus = 62;
    std::uint64_t rng_seed = 0;
};

// Draws a CMP whose neurons have von Mises tuning with component dependence
// expressed only through gains: link row k = rho_k (cos 2mu_k, sin 2mu_k),
// interaction rows are log-gains centered so bias_n carries the mean
// log-rate.
CmpParams generate_ground_truth(const GroundTruthSpec &spec);

// trials_per_stimulus joint draws at each of stimulus_count angles tiled
// evenly over [0, pi), latent index discarded.
SpikeDataset sample_dataset(const CmpParams &p, const SamplingPlan &plan);

// The evenly tiled stimulus angles of a plan.
std::vector<Stimulus> plan_stimuli(const SamplingPlan &plan);

} // namespace cmp
