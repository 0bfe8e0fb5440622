#pragma once

#include <optional>

#include "cmp/training.hpp"

namespace cmp {

struct CvReport {
    std::vector<int> component_grid;      // component counts (m_C + 1)
    Eigen::MatrixXd heldout;              // (folds, grid); NaN = failed cell
    Eigen::VectorXd mean_heldout;         // per grid entry
    Eigen::VectorXd se_heldout;           // standard error over folds
    Eigen::VectorXd relative_gain;        // mean minus the 1-component mean
    int selected_components = 1;
};

struct BoundsReport {
    double upper_bound_nll = 0.0;              // 1-component fit
    std::optional<double> lower_bound_nll = {}; // ground-truth NLL
};

// Convex 1-component (m_C = 0) fit: full-batch Adam warm-up followed by a
// per-neuron Newton polish, targeting mean-gradient norm < 1e-6. Returns the
// parameters and the mean training NLL.
std::pair<CmpParams, double> one_component_fit(const SpikeDataset &d,
                                               const TrainConfig &cfg);

// Mean negative conditional log-likelihood of d under the generating model.
double ground_truth_nll(const SpikeDataset &d, const CmpParams &truth);

// Stratified-by-stimulus k-fold CV over component counts; each cell is a
// full multi-restart fit with a derived seed. Cells are independent and may
// run in parallel; the report does not depend on evaluation order.
CvReport kfold_cv(const SpikeDataset &d, const std::vector<int> &component_grid,
                  const TrainConfig &cfg, int folds = 10);

// Grid value maximizing the mean held-out log-likelihood; ties (within
// 1e-12) break toward fewer components.
int select_components(const CvReport &r);

struct StimulusCorrelation {
    Stimulus stimulus;
    Eigen::MatrixXd correlation;
    int trial_count = 0;
};

// Per distinct stimulus, the sample Pearson correlation matrix of the counts
// (denominator m-1). Zero-variance entries are 0 with a warning.
std::vector<StimulusCorrelation> empirical_correlations(const SpikeDataset &d);

// Fold assignment used by kfold_cv, exposed for tests: fold index per trial.
// Trials are grouped by exact stimulus angle, canonicalized by count vector,
// shuffled with a per-group derived seed and dealt round-robin.
std::vector<int> cv_fold_assignment(const SpikeDataset &d, int folds,
                                    std::uint64_t seed);

} // namespace cmp
