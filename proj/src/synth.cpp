#include "cmp/synth.hpp"

#include <cmath>
#include <numbers>

namespace cmp {

namespace {

void validate_spec(const GroundTruthSpec &spec)
{
    if (spec.m_n < 1)
        throw InvalidParameterError("ground truth: m_N must be >= 1");
    if (spec.m_c < 0)
        throw InvalidParameterError("ground truth: m_C must be >= 0");
    if (spec.precision_mean <= 0.0 || spec.gain_mean <= 0.0
        || spec.log_sigma <= 0.0)
        throw InvalidParameterError(
            "ground truth: distribution parameters must be positive");
}

} // namespace

CmpParams generate_ground_truth(const GroundTruthSpec &spec)
{
    validate_spec(spec);
    Rng rng = make_rng(spec.pref_stim_seed);
    std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);
    // log-normal with E[X] = mean: location log(mean) - sigma^2/2
    std::normal_distribution<double> log_rho(
        std::log(spec.precision_mean) - 0.5 * spec.log_sigma * spec.log_sigma,
        spec.log_sigma);
    std::normal_distribution<double> log_gain(
        std::log(spec.gain_mean) - 0.5 * spec.log_sigma * spec.log_sigma,
        spec.log_sigma);
    std::normal_distribution<double> weight_bias(0.0, spec.weight_bias_scale);

    const Eigen::Index m_n = spec.m_n;
    const Eigen::Index m_c = spec.m_c;

    Eigen::VectorXd preferred(m_n), precision(m_n);
    for (Eigen::Index k = 0; k < m_n; ++k)
        preferred[k] = unif(rng);
    for (Eigen::Index k = 0; k < m_n; ++k)
        precision[k] = std::exp(log_rho(rng));

    // one log-gain per component and neuron (component 0 included)
    Eigen::MatrixXd log_gains(m_c + 1, m_n);
    for (Eigen::Index j = 0; j <= m_c; ++j)
        for (Eigen::Index k = 0; k < m_n; ++k)
            log_gains(j, k) = log_gain(rng);
    const Eigen::RowVectorXd mean_log_gain = log_gains.colwise().mean();

    CmpParams p;
    p.harmonium.bias_n = {Family::Poisson, mean_log_gain.transpose()};
    p.harmonium.bias_c = {Family::Categorical, Eigen::VectorXd(m_c)};
    for (Eigen::Index j = 0; j < m_c; ++j)
        p.harmonium.bias_c.values[j] = weight_bias(rng);
    p.harmonium.interaction =
        log_gains.bottomRows(m_c).rowwise() - mean_log_gain;
    p.link.resize(m_n, 2);
    for (Eigen::Index k = 0; k < m_n; ++k) {
        p.link(k, 0) = precision[k] * std::cos(2.0 * preferred[k]);
        p.link(k, 1) = precision[k] * std::sin(2.0 * preferred[k]);
    }
    return p;
}

std::vector<Stimulus> plan_stimuli(const SamplingPlan &plan)
{
    if (plan.stimulus_count < 1 || plan.trials_per_stimulus < 1)
        throw InvalidParameterError("sampling plan: counts must be positive");
    std::vector<Stimulus> stimuli;
    stimuli.reserve(plan.stimulus_count);
    for (int s = 0; s < plan.stimulus_count; ++s)
        stimuli.emplace_back(std::numbers::pi * s / plan.stimulus_count);
    return stimuli;
}

SpikeDataset sample_dataset(const CmpParams &p, const SamplingPlan &plan)
{
    const std::vector<Stimulus> stimuli = plan_stimuli(plan);
    SpikeDataset d;
    d.counts.reserve(stimuli.size() * plan.trials_per_stimulus);
    d.stimuli.reserve(d.counts.capacity());
    for (std::size_t s = 0; s < stimuli.size(); ++s) {
        Rng rng = make_rng(plan.rng_seed, s);
        const HarmoniumParams h = conditioned_harmonium(p, stimuli[s]);
        for (int t = 0; t < plan.trials_per_stimulus; ++t) {
            d.counts.push_back(sample_joint(h, rng).second);
            d.stimuli.push_back(stimuli[s]);
        }
    }
    return d;
}

} // namespace cmp
