#include "cmp/conditional.hpp"

#include <cmath>
#include <numbers>

#include "cmp/parallel.hpp"

namespace cmp {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

Stimulus::Stimulus(double radians)
{
    angle = radians - kPi * std::floor(radians / kPi);
    if (angle >= kPi) // guard against rounding at the seam
        angle -= kPi;
}

Eigen::Vector2d encode_stimulus(Stimulus z)
{
    return {std::cos(2.0 * z.angle), std::sin(2.0 * z.angle)};
}

void validate_dataset(const SpikeDataset &d)
{
    if (d.counts.empty())
        throw InvalidParameterError("dataset: no trials");
    if (d.counts.size() != d.stimuli.size())
        throw InvalidParameterError("dataset: counts/stimuli length mismatch");
    const Eigen::Index m_n = d.counts.front().size();
    for (const CountVector &n : d.counts) {
        if (n.size() != m_n)
            throw InvalidParameterError("dataset: ragged count vectors");
        if ((n.array() < 0).any())
            throw InvalidParameterError("dataset: negative count");
    }
}

NaturalParams conditional_bias(const CmpParams &p, Stimulus z)
{
    return {Family::Poisson,
            p.harmonium.bias_n.values + p.link * encode_stimulus(z)};
}

HarmoniumParams conditioned_harmonium(const CmpParams &p, Stimulus z)
{
    HarmoniumParams h = p.harmonium;
    h.bias_n = conditional_bias(p, z);
    return h;
}

ConditionedMixture condition(const CmpParams &p, Stimulus z)
{
    const Eigen::Index m_c = p.latent_dim();
    const Eigen::VectorXd bias = conditional_bias(p, z).values;

    ConditionedMixture cm;
    cm.comp_naturals.resize(m_c + 1, p.neuron_count());
    cm.comp_naturals.row(0) = bias.transpose();
    for (Eigen::Index j = 0; j < m_c; ++j)
        cm.comp_naturals.row(j + 1) =
            bias.transpose() + p.harmonium.interaction.row(j);
    cm.comp_rates = cm.comp_naturals.array().exp().matrix();
    cm.comp_psi = cm.comp_rates.rowwise().sum();

    Eigen::VectorXd star(m_c + 1);
    star[0] = 0.0;
    for (Eigen::Index j = 1; j <= m_c; ++j)
        star[j] = p.harmonium.bias_c.values[j - 1] + cm.comp_psi[j]
                  - cm.comp_psi[0];
    cm.log_weights = (star.array() - log_sum_exp(star)).matrix();
    cm.weights = cm.log_weights.array().exp().matrix();
    return cm;
}

double conditional_log_density(const CountVector &n,
                               const ConditionedMixture &cm)
{
    const Eigen::VectorXd nd = n.cast<double>();
    const Eigen::VectorXd joint_parts =
        cm.log_weights + cm.comp_naturals * nd - cm.comp_psi;
    double log_base = 0.0;
    for (Eigen::Index k = 0; k < n.size(); ++k)
        log_base -= log_factorial(static_cast<double>(n[k]));
    return log_sum_exp(joint_parts) + log_base;
}

double conditional_log_density(const CountVector &n, Stimulus z,
                               const CmpParams &p)
{
    return conditional_log_density(n, condition(p, z));
}

namespace {

template <bool Serial>
double mean_log_likelihood(const SpikeDataset &d, const CmpParams &p)
{
    validate_dataset(d);
    const std::ptrdiff_t m_s = static_cast<std::ptrdiff_t>(d.size());
    auto chunk_fn = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        ConditionCache cache(p);
        double s = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i)
            s += conditional_log_density(d.counts[i], cache.at(d.stimuli[i]));
        return s;
    };
    auto combine = [](double &acc, double part) { acc += part; };
    const double total =
        Serial ? par::chunked_reduce_serial<double>(m_s, chunk_fn, combine)
               : par::chunked_reduce<double>(m_s, chunk_fn, combine);
    return total / static_cast<double>(m_s);
}

} // namespace

double conditional_log_likelihood(const SpikeDataset &d, const CmpParams &p)
{
    return mean_log_likelihood<false>(d, p);
}

double conditional_log_likelihood_serial(const SpikeDataset &d,
                                         const CmpParams &p)
{
    return mean_log_likelihood<true>(d, p);
}

Eigen::VectorXd full_responsibilities(const CountVector &n,
                                      const ConditionedMixture &cm)
{
    const Eigen::VectorXd nd = n.cast<double>();
    const Eigen::VectorXd joint_parts =
        cm.log_weights + cm.comp_naturals * nd - cm.comp_psi;
    return (joint_parts.array() - log_sum_exp(joint_parts)).exp().matrix();
}

MeanParams responsibilities(const CountVector &n, Stimulus z,
                            const CmpParams &p)
{
    const Eigen::VectorXd r = full_responsibilities(n, condition(p, z));
    return {Family::Categorical, r.tail(p.latent_dim())};
}

Eigen::MatrixXd weight_curve(const CmpParams &p,
                             const std::vector<Stimulus> &grid)
{
    if (grid.empty())
        throw InvalidParameterError("weight_curve: empty grid");
    Eigen::MatrixXd curves(static_cast<Eigen::Index>(grid.size()),
                           p.latent_dim() + 1);
    par::for_each(static_cast<std::ptrdiff_t>(grid.size()),
                  [&](std::ptrdiff_t i) {
                      curves.row(i) = condition(p, grid[i]).weights.transpose();
                  });
    return curves;
}

Eigen::MatrixXd tuning_curves(const CmpParams &p,
                              const std::vector<Stimulus> &grid)
{
    if (grid.empty())
        throw InvalidParameterError("tuning_curves: empty grid");
    Eigen::MatrixXd curves(static_cast<Eigen::Index>(grid.size()),
                           p.neuron_count());
    par::for_each(static_cast<std::ptrdiff_t>(grid.size()),
                  [&](std::ptrdiff_t i) {
                      curves.row(i) = condition(p, grid[i]).mean_rate().transpose();
                  });
    return curves;
}

ConditionedMoments conditioned_moments(const CmpParams &p, Stimulus z)
{
    const ConditionedMixture cm = condition(p, z);
    const Eigen::Index m_n = p.neuron_count();

    ConditionedMoments mom;
    mom.mean = cm.mean_rate();
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m_n, m_n);
    for (Eigen::Index j = 0; j < cm.comp_rates.rows(); ++j) {
        const Eigen::VectorXd lambda = cm.comp_rates.row(j).transpose();
        second += cm.weights[j]
                  * (Eigen::MatrixXd(lambda.asDiagonal())
                     + lambda * lambda.transpose());
    }
    mom.covariance = second - mom.mean * mom.mean.transpose();

    Eigen::VectorXd sd(m_n);
    bool degenerate = false;
    for (Eigen::Index k = 0; k < m_n; ++k) {
        const double var = mom.covariance(k, k);
        if (var > 0.0 && std::isfinite(var)) {
            sd[k] = std::sqrt(var);
        } else {
            sd[k] = 0.0;
            degenerate = true;
        }
    }
    if (degenerate)
        warn("conditioned_moments: zero-variance neuron, correlation entries "
             "set to 0");
    mom.correlation = Eigen::MatrixXd::Zero(m_n, m_n);
    for (Eigen::Index k = 0; k < m_n; ++k) {
        mom.correlation(k, k) = 1.0;
        for (Eigen::Index l = 0; l < k; ++l) {
            if (sd[k] > 0.0 && sd[l] > 0.0) {
                const double c = mom.covariance(k, l) / (sd[k] * sd[l]);
                mom.correlation(k, l) = c;
                mom.correlation(l, k) = c;
            }
        }
    }
    return mom;
}

CmpGradient CmpGradient::zeros(Eigen::Index m_n, Eigen::Index m_c)
{
    CmpGradient g;
    g.bias_n = Eigen::VectorXd::Zero(m_n);
    g.bias_c = Eigen::VectorXd::Zero(m_c);
    g.interaction = Eigen::MatrixXd::Zero(m_c, m_n);
    g.link = Eigen::MatrixXd::Zero(m_n, 2);
    return g;
}

CmpGradient &CmpGradient::operator+=(const CmpGradient &o)
{
    bias_n += o.bias_n;
    bias_c += o.bias_c;
    interaction += o.interaction;
    link += o.link;
    return *this;
}

CmpGradient &CmpGradient::operator*=(double s)
{
    bias_n *= s;
    bias_c *= s;
    interaction *= s;
    link *= s;
    return *this;
}

bool CmpGradient::all_finite() const
{
    return bias_n.allFinite() && bias_c.allFinite() && interaction.allFinite()
           && link.allFinite();
}

CmpGradient trial_gradient(const CountVector &n, Stimulus z,
                           const ConditionedMixture &cm, Eigen::Index m_c,
                           const Eigen::VectorXd *frozen_resp)
{
    const Eigen::VectorXd nd = n.cast<double>();
    const Eigen::VectorXd r =
        frozen_resp ? *frozen_resp : full_responsibilities(n, cm);

    CmpGradient g;
    g.bias_n = nd - cm.mean_rate();
    g.bias_c = r.tail(m_c) - cm.weights.tail(m_c);
    g.interaction = r.tail(m_c) * nd.transpose()
                    - cm.weights.tail(m_c).asDiagonal()
                          * cm.comp_rates.bottomRows(m_c);
    g.link = g.bias_n * encode_stimulus(z).transpose();
    return g;
}

CmpGradient conditional_ll_gradients(const CountVector &n, Stimulus z,
                                     const CmpParams &p)
{
    return trial_gradient(n, z, condition(p, z), p.latent_dim(), nullptr);
}

CmpGradient surrogate_gradients(const CountVector &n, Stimulus z,
                                const CmpParams &p,
                                const Eigen::VectorXd &resp_full)
{
    if (resp_full.size() != p.latent_dim() + 1)
        throw InvalidParameterError(
            "surrogate_gradients: responsibility length mismatch");
    return trial_gradient(n, z, condition(p, z), p.latent_dim(), &resp_full);
}

double surrogate_value(const CountVector &n, Stimulus z, const CmpParams &p,
                       const Eigen::VectorXd &resp_full)
{
    if (resp_full.size() != p.latent_dim() + 1)
        throw InvalidParameterError(
            "surrogate_value: responsibility length mismatch");
    const ConditionedMixture cm = condition(p, z);
    const Eigen::Index m_c = p.latent_dim();
    const Eigen::VectorXd nd = n.cast<double>();

    // n.(bias + link s_Z) + theta_C.eta + n.Theta.eta - psi_N - psi_C
    double val = nd.dot(cm.comp_naturals.row(0)) - cm.comp_psi[0]
                 + cm.log_weights[0]; // log w_0 == -psi_C(theta*_C)
    for (Eigen::Index j = 0; j < m_c; ++j)
        val += resp_full[j + 1]
               * (p.harmonium.bias_c.values[j]
                  + nd.dot(p.harmonium.interaction.row(j)));
    return val;
}

} // namespace cmp
