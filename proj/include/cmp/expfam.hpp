#pragma once

#include <Eigen/Dense>

#include "cmp/common.hpp"
#include "cmp/rng.hpp"

namespace cmp {

enum class Family { Categorical, Poisson };

// Natural (log-scale) coordinates. For the m_C-dimensional categorical family
// outcome 0 carries no explicit parameter (theta_0 == 0); values[j-1] is the
// parameter of outcome j. For the Poisson family values[k] is the log rate of
// neuron k.
struct NaturalParams {
    Family family = Family::Poisson;
    Eigen::VectorXd values;

    Eigen::Index dim() const { return values.size(); }
};

// Mean coordinates: expected sufficient statistics. Poisson entries are rates
// (strictly positive); categorical entries are outcome probabilities in (0,1)
// whose sum is strictly below 1 (outcome 0 takes the remainder).
struct MeanParams {
    Family family = Family::Poisson;
    Eigen::VectorXd values;

    Eigen::Index dim() const { return values.size(); }
};

using CountVector = Eigen::VectorXi;

// log(1 + sum_j exp(theta_j)), max-shifted.
double categorical_log_partition(const NaturalParams &theta);

// sum_k exp(theta_k).
double poisson_log_partition(const NaturalParams &theta);

// Gradient of the log partition: softmax for categorical, exp for Poisson.
MeanParams to_mean(const NaturalParams &theta);

// Inverse transition, in closed form. Throws OutOfDomainError on boundary
// mean parameters (zero entries, or categorical mass summing to 1).
NaturalParams to_natural(const MeanParams &eta);

// n.theta - sum_k log(n_k!) - psi_N(theta); log factorial via lgamma.
double poisson_log_density(const CountVector &n, const NaturalParams &theta);

// theta_j - psi_C(theta) with theta_0 == 0; j in [0, m_C].
double categorical_log_density(Eigen::Index j, const NaturalParams &theta);

CountVector sample_poisson(const MeanParams &rates, Rng &rng);
Eigen::Index sample_categorical(const MeanParams &weights, Rng &rng);

// log(sum_i exp(v_i)) with max shift; -inf for an empty vector.
double log_sum_exp(const Eigen::VectorXd &v);

inline double log_factorial(double n)
{
    return std::lgamma(n + 1.0);
}

// Extends categorical mean parameters with the implicit weight of outcome 0,
// i.e. returns (1 - sum, eta_1, ..., eta_m).
Eigen::VectorXd full_weights(const MeanParams &eta);

} // namespace cmp
