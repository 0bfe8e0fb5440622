#include "cmp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cmp/parallel.hpp"

namespace cmp {

namespace {

constexpr double kGradTol = 1e-6;
constexpr int kAdamWarmupSteps = 200;
constexpr int kNewtonSteps = 50;

double mean_grad_norm(const CmpGradient &g)
{
    double m = 0.0;
    if (g.bias_n.size() > 0)
        m = std::max(m, g.bias_n.cwiseAbs().maxCoeff());
    if (g.bias_c.size() > 0)
        m = std::max(m, g.bias_c.cwiseAbs().maxCoeff());
    if (g.interaction.size() > 0)
        m = std::max(m, g.interaction.cwiseAbs().maxCoeff());
    if (g.link.size() > 0)
        m = std::max(m, g.link.cwiseAbs().maxCoeff());
    return m;
}

std::vector<int> all_indices(std::size_t n)
{
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

// trial indices per distinct stimulus, ordered by angle
std::map<double, std::vector<int>> stimulus_groups(const SpikeDataset &d)
{
    std::map<double, std::vector<int>> groups;
    for (std::size_t i = 0; i < d.size(); ++i)
        groups[d.stimuli[i].angle].push_back(static_cast<int>(i));
    return groups;
}

bool counts_less(const CountVector &a, const CountVector &b)
{
    return std::lexicographical_compare(a.data(), a.data() + a.size(),
                                        b.data(), b.data() + b.size());
}

} // namespace

std::pair<CmpParams, double> one_component_fit(const SpikeDataset &d,
                                               const TrainConfig &cfg)
{
    validate_dataset(d);
    const Eigen::Index m_n = d.neuron_count();
    const std::size_t m_s = d.size();

    Rng rng = make_rng(cfg.rng_seed, 0x1c);
    CmpParams p = init_params(m_n, 0, d, rng);
    const std::vector<int> idx = all_indices(m_s);

    // full-batch Adam warm-up; the problem is convex, so any start works
    TrainConfig adam_cfg = cfg;
    adam_cfg.minibatch_size = static_cast<int>(m_s);
    AdamState adam = make_adam_state(m_n, 0);
    for (int iter = 0; iter < kAdamWarmupSteps; ++iter) {
        const CmpGradient g = batch_mean_gradient(
            d, p, idx, 0, static_cast<std::ptrdiff_t>(m_s));
        if (mean_grad_norm(g) < kGradTol)
            break;
        adam_update(p, g, adam, adam_cfg);
    }

    // per-neuron Newton polish: 3 parameters per neuron, exact optimum
    Eigen::MatrixXd feats(m_s, 3);
    Eigen::MatrixXd counts(m_s, m_n);
    for (std::size_t i = 0; i < m_s; ++i) {
        const Eigen::Vector2d s = encode_stimulus(d.stimuli[i]);
        feats(i, 0) = 1.0;
        feats(i, 1) = s[0];
        feats(i, 2) = s[1];
        counts.row(i) = d.counts[i].cast<double>().transpose();
    }
    const double scale = 1.0 / static_cast<double>(m_s);
    par::for_each(m_n, [&](std::ptrdiff_t k) {
        Eigen::Vector3d beta(p.harmonium.bias_n.values[k], p.link(k, 0),
                             p.link(k, 1));
        auto objective = [&](const Eigen::Vector3d &b) {
            const Eigen::ArrayXd eta = (feats * b).array();
            return scale * (eta.exp() - counts.col(k).array() * eta).sum();
        };
        double f = objective(beta);
        for (int iter = 0; iter < kNewtonSteps; ++iter) {
            const Eigen::ArrayXd mu = (feats * beta).array().exp();
            const Eigen::Vector3d grad =
                scale * (feats.transpose() * (mu.matrix() - counts.col(k)));
            if (grad.cwiseAbs().maxCoeff() < 1e-12)
                break;
            const Eigen::Matrix3d hess =
                scale * (feats.transpose() * mu.matrix().asDiagonal() * feats);
            Eigen::Vector3d step = hess.ldlt().solve(-grad);
            double t = 1.0;
            Eigen::Vector3d trial = beta + step;
            double f_trial = objective(trial);
            for (int h = 0; h < 30 && !(f_trial < f + 1e-15); ++h) {
                t *= 0.5;
                trial = beta + t * step;
                f_trial = objective(trial);
            }
            if (!(f_trial < f + 1e-15))
                break;
            beta = trial;
            f = f_trial;
        }
        p.harmonium.bias_n.values[k] = beta[0];
        p.link(k, 0) = beta[1];
        p.link(k, 1) = beta[2];
    });

    const CmpGradient g_final = batch_mean_gradient(
        d, p, idx, 0, static_cast<std::ptrdiff_t>(m_s));
    if (mean_grad_norm(g_final) >= kGradTol)
        warn("one_component_fit: gradient norm "
             + std::to_string(mean_grad_norm(g_final))
             + " above tolerance, returning best iterate");
    return {p, -conditional_log_likelihood(d, p)};
}

double ground_truth_nll(const SpikeDataset &d, const CmpParams &truth)
{
    return -conditional_log_likelihood(d, truth);
}

std::vector<int> cv_fold_assignment(const SpikeDataset &d, int folds,
                                    std::uint64_t seed)
{
    validate_dataset(d);
    if (folds < 2)
        throw ConfigError("cv: folds must be >= 2");
    std::vector<int> assignment(d.size(), -1);
    std::size_t group_index = 0;
    for (auto &[angle, idxs] : stimulus_groups(d)) {
        if (static_cast<int>(idxs.size()) < folds)
            throw ConfigError("cv: fewer trials than folds at a stimulus");
        // canonical content order makes folds invariant to trial order
        std::stable_sort(idxs.begin(), idxs.end(), [&](int a, int b) {
            return counts_less(d.counts[a], d.counts[b]);
        });
        Rng rng = make_rng(seed, group_index++);
        std::shuffle(idxs.begin(), idxs.end(), rng);
        for (std::size_t t = 0; t < idxs.size(); ++t)
            assignment[idxs[t]] = static_cast<int>(t % folds);
    }
    return assignment;
}

namespace {

SpikeDataset subset(const SpikeDataset &d, const std::vector<int> &fold_of,
                    int fold, bool heldout)
{
    SpikeDataset s;
    for (std::size_t i = 0; i < d.size(); ++i)
        if ((fold_of[i] == fold) == heldout) {
            s.counts.push_back(d.counts[i]);
            s.stimuli.push_back(d.stimuli[i]);
        }
    return s;
}

} // namespace

CvReport kfold_cv(const SpikeDataset &d, const std::vector<int> &component_grid,
                  const TrainConfig &cfg, int folds)
{
    validate_dataset(d);
    std::vector<int> grid = component_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty())
        throw ConfigError("cv: empty component grid");
    if (grid.front() < 1)
        throw ConfigError("cv: component counts must be >= 1");
    if (std::find(grid.begin(), grid.end(), 1) == grid.end())
        throw ConfigError("cv: component grid must include 1");

    const std::vector<int> fold_of = cv_fold_assignment(d, folds, cfg.rng_seed);
    const std::ptrdiff_t n_grid = static_cast<std::ptrdiff_t>(grid.size());

    CvReport report;
    report.component_grid = grid;
    report.heldout.resize(folds, n_grid);

    par::for_each(folds * n_grid, [&](std::ptrdiff_t cell) {
        const int f = static_cast<int>(cell / n_grid);
        const int gi = static_cast<int>(cell % n_grid);
        const SpikeDataset train = subset(d, fold_of, f, false);
        const SpikeDataset test = subset(d, fold_of, f, true);
        TrainConfig cell_cfg = cfg;
        cell_cfg.rng_seed =
            mix_seed(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(f)),
                     static_cast<std::uint64_t>(grid[gi]));
        try {
            const FitReport rep = fit(train, grid[gi] - 1, cell_cfg);
            report.heldout(f, gi) =
                conditional_log_likelihood(test, rep.final_params);
        } catch (const std::exception &e) {
            warn("cv: cell (fold " + std::to_string(f) + ", components "
                 + std::to_string(grid[gi]) + ") failed: " + e.what());
            report.heldout(f, gi) = std::numeric_limits<double>::quiet_NaN();
        }
    });

    report.mean_heldout.resize(n_grid);
    report.se_heldout.resize(n_grid);
    for (Eigen::Index gi = 0; gi < n_grid; ++gi) {
        double sum = 0.0, sum2 = 0.0;
        int m = 0;
        for (int f = 0; f < folds; ++f) {
            const double v = report.heldout(f, gi);
            if (std::isnan(v))
                continue;
            sum += v;
            sum2 += v * v;
            ++m;
        }
        if (m == 0) {
            report.mean_heldout[gi] = std::numeric_limits<double>::quiet_NaN();
            report.se_heldout[gi] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double mean = sum / m;
        report.mean_heldout[gi] = mean;
        report.se_heldout[gi] =
            m > 1 ? std::sqrt((sum2 - m * mean * mean) / (m - 1)
                              / static_cast<double>(m))
                  : 0.0;
    }

    const Eigen::Index one_idx = static_cast<Eigen::Index>(
        std::find(grid.begin(), grid.end(), 1) - grid.begin());
    report.relative_gain =
        report.mean_heldout.array() - report.mean_heldout[one_idx];
    report.selected_components = select_components(report);
    return report;
}

int select_components(const CvReport &r)
{
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index gi = 0; gi < r.mean_heldout.size(); ++gi)
        if (!std::isnan(r.mean_heldout[gi]))
            best = std::max(best, r.mean_heldout[gi]);
    for (Eigen::Index gi = 0; gi < r.mean_heldout.size(); ++gi)
        if (!std::isnan(r.mean_heldout[gi])
            && r.mean_heldout[gi] >= best - 1e-12)
            return r.component_grid[gi];
    return r.component_grid.front();
}

std::vector<StimulusCorrelation> empirical_correlations(const SpikeDataset &d)
{
    validate_dataset(d);
    const Eigen::Index m_n = d.neuron_count();
    std::vector<StimulusCorrelation> out;
    bool degenerate = false;
    for (const auto &[angle, idxs] : stimulus_groups(d)) {
        if (idxs.size() < 2)
            throw InvalidParameterError(
                "empirical_correlations: fewer than 2 trials at a stimulus");
        const double m = static_cast<double>(idxs.size());
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(m_n);
        for (int i : idxs)
            mean += d.counts[i].cast<double>();
        mean /= m;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m_n, m_n);
        for (int i : idxs) {
            const Eigen::VectorXd c = d.counts[i].cast<double>() - mean;
            cov.noalias() += c * c.transpose();
        }
        cov /= m - 1.0;

        StimulusCorrelation sc;
        sc.stimulus = Stimulus(angle);
        sc.trial_count = static_cast<int>(idxs.size());
        sc.correlation = Eigen::MatrixXd::Zero(m_n, m_n);
        Eigen::VectorXd sd(m_n);
        for (Eigen::Index k = 0; k < m_n; ++k) {
            const double var = cov(k, k);
            sd[k] = var > 0.0 ? std::sqrt(var) : 0.0;
            if (!(var > 0.0))
                degenerate = true;
            sc.correlation(k, k) = 1.0;
        }
        for (Eigen::Index k = 0; k < m_n; ++k)
            for (Eigen::Index l = 0; l < k; ++l)
                if (sd[k] > 0.0 && sd[l] > 0.0) {
                    const double c = cov(k, l) / (sd[k] * sd[l]);
                    sc.correlation(k, l) = c;
                    sc.correlation(l, k) = c;
                }
        out.push_back(std::move(sc));
    }
    if (degenerate)
        warn("empirical_correlations: zero-variance neuron, entries set to 0");
    return out;
}

} // namespace cmp
