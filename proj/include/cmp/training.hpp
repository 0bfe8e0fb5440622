#pragma once

#include <optional>
#include <string>

#include "cmp/conditional.hpp"

namespace cmp {

enum class Algorithm { Em, Sgd, Hybrid };

const char *algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string &name);

struct TrainConfig {
    Algorithm algorithm = Algorithm::Hybrid;
    int epochs = 100;
    int minibatch_size = 50;
    double learning_rate = 0.005;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int restarts = 10;
    std::uint64_t rng_seed = 0;
    bool reset_adam_each_epoch = true;
    // the paper leaves the phase order and the M-step pass count open
    bool hybrid_closed_form_first = false;
    int em_inner_passes = 1;
};

void validate_config(const TrainConfig &cfg, std::size_t dataset_size);

struct AdamState {
    CmpGradient first_moment;
    CmpGradient second_moment;
    long step_count = 0;
};

AdamState make_adam_state(Eigen::Index m_n, Eigen::Index m_c);

struct TrainerState {
    AdamState adam;
    Rng rng;
};

struct FitReport {
    std::vector<double> nll_trace; // epochs + 1 entries; [0] is the initial NLL
    CmpParams final_params;
    int restart_index = 0;
    double wall_time_seconds = 0.0; // reported, never serialized

    double final_nll() const { return nll_trace.back(); }
};

// bias_n from per-neuron grand-mean rates (clamped at 1e-3), zero category
// bias, Normal(0, 0.1^2) interaction and link entries.
CmpParams init_params(Eigen::Index m_n, Eigen::Index m_c,
                      const SpikeDataset &d, Rng &rng);

// Bias-corrected Adam ascent step on all four blocks; parameters clamped to
// [-kNaturalClamp, kNaturalClamp]. Throws FitAbortError on a non-finite
// gradient.
void adam_update(CmpParams &p, const CmpGradient &grad, AdamState &state,
                 const TrainConfig &cfg);

// Mean gradient over the trials listed in idx. frozen, when non-null, holds
// one full responsibility vector per trial (column i for trial i) and selects
// the M-step surrogate gradient.
CmpGradient batch_mean_gradient(const SpikeDataset &d, const CmpParams &p,
                                const std::vector<int> &idx,
                                std::ptrdiff_t lo, std::ptrdiff_t hi,
                                const Eigen::MatrixXd *frozen = nullptr);

// Full responsibility vectors for every trial, one column each.
Eigen::MatrixXd all_responsibilities(const SpikeDataset &d,
                                     const CmpParams &p);

// One pass of minibatched Adam ascent on the conditional log-likelihood.
void sgd_epoch(const SpikeDataset &d, CmpParams &p, const TrainConfig &cfg,
               TrainerState &st);

// Expectation step (responsibilities frozen for the epoch) followed by one
// minibatched Adam pass on the M-step surrogate.
void em_epoch(const SpikeDataset &d, CmpParams &p, const TrainConfig &cfg,
              TrainerState &st);

// Closed-form maximization of the surrogate over bias_n and the interaction
// matrix, full dataset as a single batch; bias_c and link untouched.
CmpParams hybrid_closed_form(const SpikeDataset &d, const CmpParams &p);

// Alternates SGD epochs with the closed-form update.
void hybrid_epoch(const SpikeDataset &d, CmpParams &p, const TrainConfig &cfg,
                  TrainerState &st, int epoch_index);

// Runs cfg.restarts independent descents (parallelizable; winner identical to
// sequential execution) and returns the report with the lowest final
// training NLL.
FitReport fit(const SpikeDataset &d, Eigen::Index m_c, const TrainConfig &cfg);

} // namespace cmp
