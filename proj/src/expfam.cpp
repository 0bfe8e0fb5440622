#include "cmp/expfam.hpp"

#include <cmath>

namespace cmp {

namespace {

void require_family(const NaturalParams &theta, Family family, const char *op)
{
    if (theta.family != family)
        throw InvalidParameterError(std::string(op) + ": wrong family");
}

void require_finite(const Eigen::VectorXd &v, const char *op)
{
    if (!v.allFinite())
        throw InvalidParameterError(std::string(op) + ": non-finite entries");
}

} // namespace

double log_sum_exp(const Eigen::VectorXd &v)
{
    if (v.size() == 0)
        return -std::numeric_limits<double>::infinity();
    const double m = v.maxCoeff();
    if (!std::isfinite(m))
        return m;
    return m + std::log((v.array() - m).exp().sum());
}

double categorical_log_partition(const NaturalParams &theta)
{
    require_family(theta, Family::Categorical, "categorical_log_partition");
    require_finite(theta.values, "categorical_log_partition");
    if (theta.values.size() == 0)
        return 0.0;
    // shift by max(0, max theta) so the implicit theta_0 = 0 term is covered
    const double m = std::max(0.0, theta.values.maxCoeff());
    return m + std::log(std::exp(-m) + (theta.values.array() - m).exp().sum());
}

double poisson_log_partition(const NaturalParams &theta)
{
    require_family(theta, Family::Poisson, "poisson_log_partition");
    require_finite(theta.values, "poisson_log_partition");
    return theta.values.array().exp().sum();
}

MeanParams to_mean(const NaturalParams &theta)
{
    require_finite(theta.values, "to_mean");
    if (theta.family == Family::Poisson)
        return {Family::Poisson, theta.values.array().exp().matrix()};
    const double psi = categorical_log_partition(theta);
    return {Family::Categorical, (theta.values.array() - psi).exp().matrix()};
}

NaturalParams to_natural(const MeanParams &eta)
{
    require_finite(eta.values, "to_natural");
    if (eta.family == Family::Poisson) {
        if ((eta.values.array() <= 0.0).any())
            throw OutOfDomainError("to_natural: nonpositive Poisson mean");
        return {Family::Poisson, eta.values.array().log().matrix()};
    }
    if ((eta.values.array() <= 0.0).any() || (eta.values.array() >= 1.0).any())
        throw OutOfDomainError("to_natural: categorical mean outside (0,1)");
    const double w0 = 1.0 - eta.values.sum();
    if (w0 <= 0.0)
        throw OutOfDomainError("to_natural: categorical means sum to >= 1");
    return {Family::Categorical,
            (eta.values.array().log() - std::log(w0)).matrix()};
}

double poisson_log_density(const CountVector &n, const NaturalParams &theta)
{
    require_family(theta, Family::Poisson, "poisson_log_density");
    if (n.size() != theta.values.size())
        throw InvalidParameterError("poisson_log_density: length mismatch");
    double log_base = 0.0;
    for (Eigen::Index k = 0; k < n.size(); ++k)
        log_base -= log_factorial(static_cast<double>(n[k]));
    return n.cast<double>().dot(theta.values) + log_base
           - poisson_log_partition(theta);
}

double categorical_log_density(Eigen::Index j, const NaturalParams &theta)
{
    require_family(theta, Family::Categorical, "categorical_log_density");
    if (j < 0 || j > theta.values.size())
        throw IndexError("categorical_log_density: outcome out of range");
    const double t = j == 0 ? 0.0 : theta.values[j - 1];
    return t - categorical_log_partition(theta);
}

CountVector sample_poisson(const MeanParams &rates, Rng &rng)
{
    if (rates.family != Family::Poisson)
        throw InvalidParameterError("sample_poisson: wrong family");
    if ((rates.values.array() <= 0.0).any())
        throw InvalidParameterError("sample_poisson: nonpositive rate");
    CountVector n(rates.values.size());
    for (Eigen::Index k = 0; k < n.size(); ++k) {
        std::poisson_distribution<int> dist(rates.values[k]);
        n[k] = dist(rng);
    }
    return n;
}

Eigen::VectorXd full_weights(const MeanParams &eta)
{
    Eigen::VectorXd w(eta.values.size() + 1);
    w[0] = 1.0 - eta.values.sum();
    w.tail(eta.values.size()) = eta.values;
    return w;
}

Eigen::Index sample_categorical(const MeanParams &weights, Rng &rng)
{
    if (weights.family != Family::Categorical)
        throw InvalidParameterError("sample_categorical: wrong family");
    const Eigen::VectorXd w = full_weights(weights);
    if ((w.array() < 0.0).any())
        throw InvalidParameterError("sample_categorical: negative weight");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double cumulative = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        cumulative += w[j];
        if (u < cumulative)
            return j;
    }
    return w.size() - 1; // rounding slack
}

} // namespace cmp
