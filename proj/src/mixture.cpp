#include "cmp/mixture.hpp"

#include <cmath>

namespace cmp {

namespace {

constexpr double kDegenerateWeight = 1e-12;

// log weights of all components, normalized: theta*_C extended with the
// implicit zeroth entry, minus psi_C(theta*_C).
Eigen::VectorXd mixture_log_weights(const HarmoniumParams &h,
                                    const Eigen::MatrixXd &comp_naturals)
{
    const Eigen::Index m_c = h.latent_dim();
    const double psi_base = poisson_log_partition(h.bias_n);
    Eigen::VectorXd star(m_c + 1);
    star[0] = 0.0;
    for (Eigen::Index j = 1; j <= m_c; ++j)
        star[j] = h.bias_c.values[j - 1]
                  + comp_naturals.row(j).array().exp().sum() - psi_base;
    return (star.array() - log_sum_exp(star)).matrix();
}

} // namespace

Eigen::MatrixXd component_naturals(const HarmoniumParams &h)
{
    const Eigen::Index m_c = h.latent_dim();
    Eigen::MatrixXd comps(m_c + 1, h.neuron_count());
    comps.row(0) = h.bias_n.values.transpose();
    for (Eigen::Index j = 0; j < m_c; ++j)
        comps.row(j + 1) = (h.bias_n.values.transpose() + h.interaction.row(j));
    return comps;
}

MixtureParams harmonium_to_mixture(const HarmoniumParams &h)
{
    const Eigen::Index m_c = h.latent_dim();
    const Eigen::MatrixXd comps = component_naturals(h);
    const double psi_base = poisson_log_partition(h.bias_n);

    NaturalParams weight_naturals{Family::Categorical, Eigen::VectorXd(m_c)};
    for (Eigen::Index j = 0; j < m_c; ++j)
        weight_naturals.values[j] = h.bias_c.values[j]
                                    + comps.row(j + 1).array().exp().sum()
                                    - psi_base;

    MixtureParams m;
    m.weights = to_mean(weight_naturals);
    m.components.reserve(m_c + 1);
    for (Eigen::Index j = 0; j <= m_c; ++j)
        m.components.push_back({Family::Poisson, comps.row(j).transpose()});
    return m;
}

HarmoniumParams mixture_to_harmonium(const MixtureParams &m)
{
    const Eigen::Index m_c = m.latent_dim();
    if (static_cast<Eigen::Index>(m.components.size()) != m_c + 1)
        throw InvalidParameterError(
            "mixture_to_harmonium: component count != latent_dim + 1");
    const NaturalParams weight_naturals = to_natural(m.weights);
    const Eigen::VectorXd &base = m.components[0].values;
    const double psi_base = poisson_log_partition(m.components[0]);

    HarmoniumParams h;
    h.bias_n = {Family::Poisson, base};
    h.bias_c = {Family::Categorical, Eigen::VectorXd(m_c)};
    h.interaction.resize(m_c, base.size());
    for (Eigen::Index j = 0; j < m_c; ++j) {
        const NaturalParams &comp = m.components[j + 1];
        h.interaction.row(j) = (comp.values - base).transpose();
        h.bias_c.values[j] = weight_naturals.values[j]
                             - poisson_log_partition(comp) + psi_base;
    }
    return h;
}

double joint_log_density(const CountVector &n, Eigen::Index j,
                         const HarmoniumParams &h)
{
    const Eigen::Index m_c = h.latent_dim();
    if (j < 0 || j > m_c)
        throw IndexError("joint_log_density: category out of range");
    if (n.size() != h.neuron_count())
        throw InvalidParameterError("joint_log_density: count length mismatch");

    const Eigen::MatrixXd comps = component_naturals(h);
    const Eigen::VectorXd star =
        mixture_log_weights(h, comps); // normalized log weights
    // psi_XC = psi_N(bias_n) + psi_C(theta*_C); fold psi_C in through the
    // normalized log weights: theta*_C,j - psi_C = star[j].
    const Eigen::VectorXd nd = n.cast<double>();
    double log_base = 0.0;
    for (Eigen::Index k = 0; k < n.size(); ++k)
        log_base -= log_factorial(static_cast<double>(n[k]));
    double val = nd.dot(h.bias_n.values) + log_base
                 - poisson_log_partition(h.bias_n) + star[j];
    if (j > 0)
        val += nd.dot(h.interaction.row(j - 1));
    return val;
}

double marginal_log_density(const CountVector &n, const HarmoniumParams &h)
{
    const Eigen::Index m_c = h.latent_dim();
    Eigen::VectorXd joints(m_c + 1);
    for (Eigen::Index j = 0; j <= m_c; ++j)
        joints[j] = joint_log_density(n, j, h);
    return log_sum_exp(joints);
}

MeanParams posterior(const CountVector &n, const HarmoniumParams &h)
{
    const Eigen::Index m_c = h.latent_dim();
    if (n.size() != h.neuron_count())
        throw InvalidParameterError("posterior: count length mismatch");
    // j-dependent part of the joint log density; the z/base terms are
    // constant across components and drop in the softmax.
    Eigen::VectorXd logits(m_c + 1);
    logits[0] = 0.0;
    const Eigen::VectorXd nd = n.cast<double>();
    for (Eigen::Index j = 1; j <= m_c; ++j)
        logits[j] = h.bias_c.values[j - 1] + nd.dot(h.interaction.row(j - 1));
    const Eigen::VectorXd r =
        (logits.array() - log_sum_exp(logits)).exp().matrix();
    return {Family::Categorical, r.tail(m_c)};
}

HarmoniumMeans harmonium_means(const HarmoniumParams &h)
{
    const Eigen::Index m_c = h.latent_dim();
    const MixtureParams m = harmonium_to_mixture(h);
    const Eigen::VectorXd w = full_weights(m.weights);

    HarmoniumMeans means;
    means.mean_c = m.weights;
    means.cross.resize(m_c, h.neuron_count());
    Eigen::VectorXd mean_n =
        w[0] * m.components[0].values.array().exp().matrix();
    for (Eigen::Index j = 1; j <= m_c; ++j) {
        const Eigen::VectorXd rates =
            m.components[j].values.array().exp().matrix();
        means.cross.row(j - 1) = (w[j] * rates).transpose();
        mean_n += w[j] * rates;
    }
    means.mean_n = {Family::Poisson, mean_n};
    return means;
}

HarmoniumParams harmonium_means_to_params(const HarmoniumMeans &m)
{
    const Eigen::Index m_c = m.mean_c.values.size();
    const Eigen::VectorXd w = full_weights(m.mean_c);
    if ((w.array() <= 0.0).any() || (w.array() >= 1.0).any()) {
        if (m_c > 0)
            throw OutOfDomainError(
                "harmonium_means_to_params: weights not interior");
        // m_c == 0: w = (1) is the whole simplex
    }

    MixtureParams mix;
    mix.weights = m.mean_c;
    mix.components.resize(m_c + 1);
    Eigen::VectorXd lambda0 = m.mean_n.values;
    for (Eigen::Index j = 1; j <= m_c; ++j) {
        const Eigen::VectorXd lambda_j = m.cross.row(j - 1).transpose() / w[j];
        if ((lambda_j.array() <= 0.0).any())
            throw OutOfDomainError(
                "harmonium_means_to_params: nonpositive component rate");
        mix.components[j] = {Family::Poisson,
                             lambda_j.array().log().matrix()};
        lambda0 -= m.cross.row(j - 1).transpose();
    }
    lambda0 /= w[0];
    if ((lambda0.array() <= 0.0).any())
        throw OutOfDomainError(
            "harmonium_means_to_params: nonpositive base rate");
    mix.components[0] = {Family::Poisson, lambda0.array().log().matrix()};
    return mixture_to_harmonium(mix);
}

HarmoniumParams em_step(const std::vector<CountVector> &data,
                        const HarmoniumParams &h)
{
    if (data.empty())
        throw InvalidParameterError("em_step: empty dataset");
    const Eigen::Index m_n = h.neuron_count();
    const Eigen::Index m_c = h.latent_dim();

    Eigen::VectorXd sum_n = Eigen::VectorXd::Zero(m_n);
    Eigen::VectorXd sum_r = Eigen::VectorXd::Zero(m_c);
    Eigen::MatrixXd sum_cross = Eigen::MatrixXd::Zero(m_c, m_n);
    for (const CountVector &n : data) {
        const MeanParams r = posterior(n, h);
        const Eigen::VectorXd nd = n.cast<double>();
        sum_n += nd;
        sum_r += r.values;
        sum_cross.noalias() += r.values * nd.transpose();
    }
    const double scale = 1.0 / static_cast<double>(data.size());
    const Eigen::VectorXd mean_r = sum_r * scale;
    const Eigen::VectorXd w = full_weights({Family::Categorical, mean_r});
    if ((w.array() < kDegenerateWeight).any())
        throw DegenerateComponentError(
            "em_step: a component's averaged responsibility vanished");

    HarmoniumMeans means;
    means.mean_n = {Family::Poisson, sum_n * scale};
    means.mean_c = {Family::Categorical, mean_r};
    means.cross = sum_cross * scale;
    return harmonium_means_to_params(means);
}

HarmoniumGradient ll_gradients(const CountVector &n, const HarmoniumParams &h)
{
    const HarmoniumMeans means = harmonium_means(h);
    const MeanParams r = posterior(n, h);
    const Eigen::VectorXd nd = n.cast<double>();

    HarmoniumGradient g;
    g.bias_n = nd - means.mean_n.values;
    g.bias_c = r.values - means.mean_c.values;
    g.interaction = r.values * nd.transpose() - means.cross;
    return g;
}

std::pair<Eigen::Index, CountVector> sample_joint(const HarmoniumParams &h,
                                                  Rng &rng)
{
    const MixtureParams m = harmonium_to_mixture(h);
    const Eigen::Index j = sample_categorical(m.weights, rng);
    const CountVector n = sample_poisson(to_mean(m.components[j]), rng);
    return {j, n};
}

} // namespace cmp
