#include "cmp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cmp/parallel.hpp"

namespace cmp {

namespace {

constexpr double kInitRateFloor = 1e-3;
constexpr double kInitSigma = 0.1;
constexpr double kNumeratorFloor = 1e-8;

double clamp_natural(double x)
{
    return std::clamp(x, -kNaturalClamp, kNaturalClamp);
}

} // namespace

const char *algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::Em:
        return "em";
    case Algorithm::Sgd:
        return "sgd";
    case Algorithm::Hybrid:
        return "hybrid";
    }
    return "?";
}

std::optional<Algorithm> parse_algorithm(const std::string &name)
{
    if (name == "em")
        return Algorithm::Em;
    if (name == "sgd")
        return Algorithm::Sgd;
    if (name == "hybrid")
        return Algorithm::Hybrid;
    return std::nullopt;
}

void validate_config(const TrainConfig &cfg, std::size_t dataset_size)
{
    if (cfg.epochs < 1)
        throw ConfigError("epochs must be positive");
    if (cfg.minibatch_size < 1)
        throw ConfigError("minibatch_size must be positive");
    if (static_cast<std::size_t>(cfg.minibatch_size) > dataset_size)
        throw ConfigError("minibatch_size exceeds dataset size");
    if (cfg.learning_rate <= 0.0)
        throw ConfigError("learning_rate must be positive");
    if (cfg.restarts < 1)
        throw ConfigError("restarts must be positive");
    if (cfg.em_inner_passes < 1)
        throw ConfigError("em_inner_passes must be positive");
}

AdamState make_adam_state(Eigen::Index m_n, Eigen::Index m_c)
{
    return {CmpGradient::zeros(m_n, m_c), CmpGradient::zeros(m_n, m_c), 0};
}

CmpParams init_params(Eigen::Index m_n, Eigen::Index m_c,
                      const SpikeDataset &d, Rng &rng)
{
    validate_dataset(d);
    if (d.neuron_count() != m_n)
        throw InvalidParameterError("init_params: m_N does not match dataset");

    Eigen::VectorXd mean_rate = Eigen::VectorXd::Zero(m_n);
    for (const CountVector &n : d.counts)
        mean_rate += n.cast<double>();
    mean_rate /= static_cast<double>(d.size());
    if ((mean_rate.array() < kInitRateFloor).any())
        warn("init_params: silent neuron, baseline rate clamped to 1e-3");
    const Eigen::VectorXd bias_n =
        mean_rate.array().max(kInitRateFloor).log().matrix();

    CmpParams p;
    p.harmonium.bias_n = {Family::Poisson, bias_n};
    p.harmonium.bias_c = {Family::Categorical, Eigen::VectorXd::Zero(m_c)};
    p.harmonium.interaction.resize(m_c, m_n);
    p.link.resize(m_n, 2);
    std::normal_distribution<double> noise(0.0, kInitSigma);
    for (Eigen::Index j = 0; j < m_c; ++j)
        for (Eigen::Index k = 0; k < m_n; ++k)
            p.harmonium.interaction(j, k) = noise(rng);
    for (Eigen::Index k = 0; k < m_n; ++k)
        for (Eigen::Index c = 0; c < 2; ++c)
            p.link(k, c) = noise(rng);
    return p;
}

void adam_update(CmpParams &p, const CmpGradient &grad, AdamState &state,
                 const TrainConfig &cfg)
{
    if (!grad.all_finite())
        throw FitAbortError("adam_update: non-finite gradient");
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, state.step_count);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, state.step_count);

    auto step = [&](auto &theta, auto &m, auto &v, const auto &g) {
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = (cfg.adam_beta2 * v.array()
             + (1.0 - cfg.adam_beta2) * g.array().square())
                .matrix();
        const auto mhat = m.array() / bc1;
        const auto denom = (v.array() / bc2).sqrt() + cfg.adam_epsilon;
        theta = (theta.array() + cfg.learning_rate * mhat / denom)
                    .max(-kNaturalClamp)
                    .min(kNaturalClamp)
                    .matrix();
    };
    step(p.harmonium.bias_n.values, state.first_moment.bias_n,
         state.second_moment.bias_n, grad.bias_n);
    step(p.harmonium.bias_c.values, state.first_moment.bias_c,
         state.second_moment.bias_c, grad.bias_c);
    step(p.harmonium.interaction, state.first_moment.interaction,
         state.second_moment.interaction, grad.interaction);
    step(p.link, state.first_moment.link, state.second_moment.link,
         grad.link);
}

CmpGradient batch_mean_gradient(const SpikeDataset &d, const CmpParams &p,
                                const std::vector<int> &idx,
                                std::ptrdiff_t lo, std::ptrdiff_t hi,
                                const Eigen::MatrixXd *frozen)
{
    const Eigen::Index m_n = p.neuron_count();
    const Eigen::Index m_c = p.latent_dim();
    const std::ptrdiff_t count = hi - lo;

    auto chunk_fn = [&](std::ptrdiff_t clo, std::ptrdiff_t chi) {
        ConditionCache cache(p);
        CmpGradient acc = CmpGradient::zeros(m_n, m_c);
        Eigen::VectorXd resp;
        for (std::ptrdiff_t t = clo; t < chi; ++t) {
            const int i = idx[static_cast<std::size_t>(lo + t)];
            const Eigen::VectorXd *fr = nullptr;
            if (frozen) {
                resp = frozen->col(i);
                fr = &resp;
            }
            acc += trial_gradient(d.counts[i], d.stimuli[i],
                                  cache.at(d.stimuli[i]), m_c, fr);
        }
        return acc;
    };
    auto combine = [](CmpGradient &acc, CmpGradient &&part) { acc += part; };
    CmpGradient g = par::chunked_reduce<CmpGradient>(count, chunk_fn, combine);
    g *= 1.0 / static_cast<double>(count);
    return g;
}

Eigen::MatrixXd all_responsibilities(const SpikeDataset &d, const CmpParams &p)
{
    const std::ptrdiff_t m_s = static_cast<std::ptrdiff_t>(d.size());
    Eigen::MatrixXd resp(p.latent_dim() + 1, m_s);
    par::for_each(par::chunk_count(m_s), [&](std::ptrdiff_t c) {
        const std::ptrdiff_t lo = c * par::kChunk;
        const std::ptrdiff_t hi = std::min(m_s, lo + par::kChunk);
        ConditionCache cache(p);
        for (std::ptrdiff_t i = lo; i < hi; ++i)
            resp.col(i) =
                full_responsibilities(d.counts[i], cache.at(d.stimuli[i]));
    });
    return resp;
}

namespace {

void minibatch_pass(const SpikeDataset &d, CmpParams &p,
                    const TrainConfig &cfg, TrainerState &st,
                    const Eigen::MatrixXd *frozen)
{
    const std::ptrdiff_t m_s = static_cast<std::ptrdiff_t>(d.size());
    std::vector<int> idx(static_cast<std::size_t>(m_s));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), st.rng);

    for (std::ptrdiff_t start = 0; start < m_s;
         start += cfg.minibatch_size) {
        const std::ptrdiff_t stop =
            std::min(m_s, start + static_cast<std::ptrdiff_t>(
                                      cfg.minibatch_size));
        const CmpGradient g =
            batch_mean_gradient(d, p, idx, start, stop, frozen);
        adam_update(p, g, st.adam, cfg);
    }
}

} // namespace

void sgd_epoch(const SpikeDataset &d, CmpParams &p, const TrainConfig &cfg,
               TrainerState &st)
{
    minibatch_pass(d, p, cfg, st, nullptr);
}

void em_epoch(const SpikeDataset &d, CmpParams &p, const TrainConfig &cfg,
              TrainerState &st)
{
    const Eigen::MatrixXd frozen = all_responsibilities(d, p);
    for (int pass = 0; pass < cfg.em_inner_passes; ++pass)
        minibatch_pass(d, p, cfg, st, &frozen);
}

CmpParams hybrid_closed_form(const SpikeDataset &d, const CmpParams &p)
{
    validate_dataset(d);
    const Eigen::Index m_n = p.neuron_count();
    const Eigen::Index m_c = p.latent_dim();
    const std::ptrdiff_t m_s = static_cast<std::ptrdiff_t>(d.size());
    const Eigen::MatrixXd resp = all_responsibilities(d, p);

    struct Sums {
        Eigen::MatrixXd a; // sum_i r_ij n_ik
        Eigen::MatrixXd b; // sum_i r_ij exp(link_k(z_i))
    };
    auto chunk_fn = [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        Sums s{Eigen::MatrixXd::Zero(m_c + 1, m_n),
               Eigen::MatrixXd::Zero(m_c + 1, m_n)};
        std::vector<std::pair<double, Eigen::VectorXd>> link_cache;
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
            const double angle = d.stimuli[i].angle;
            const Eigen::VectorXd *drive = nullptr;
            for (const auto &entry : link_cache)
                if (entry.first == angle)
                    drive = &entry.second;
            if (!drive) {
                link_cache.emplace_back(
                    angle, (p.link * encode_stimulus(d.stimuli[i]))
                               .array()
                               .exp()
                               .matrix());
                drive = &link_cache.back().second;
            }
            s.a.noalias() +=
                resp.col(i) * d.counts[i].cast<double>().transpose();
            s.b.noalias() += resp.col(i) * drive->transpose();
        }
        return s;
    };
    auto combine = [](Sums &acc, Sums &&part) {
        acc.a += part.a;
        acc.b += part.b;
    };
    Sums sums = par::chunked_reduce<Sums>(m_s, chunk_fn, combine);

    long clamped = 0;
    for (Eigen::Index j = 0; j <= m_c; ++j)
        for (Eigen::Index k = 0; k < m_n; ++k)
            if (!(sums.a(j, k) > 0.0)) {
                sums.a(j, k) = kNumeratorFloor;
                ++clamped;
            }
    if (clamped > 0)
        warn("hybrid_closed_form: " + std::to_string(clamped)
             + " empty component-neuron cell(s) clamped");

    const Eigen::MatrixXd dagger =
        (sums.a.array() / sums.b.array()).log().matrix();

    CmpParams out = p;
    for (Eigen::Index k = 0; k < m_n; ++k)
        out.harmonium.bias_n.values[k] = clamp_natural(dagger(0, k));
    for (Eigen::Index j = 0; j < m_c; ++j)
        for (Eigen::Index k = 0; k < m_n; ++k)
            out.harmonium.interaction(j, k) =
                clamp_natural(dagger(j + 1, k) - dagger(0, k));
    return out;
}

void hybrid_epoch(const SpikeDataset &d, CmpParams &p, const TrainConfig &cfg,
                  TrainerState &st, int epoch_index)
{
    const bool closed_form = cfg.hybrid_closed_form_first
                                 ? epoch_index % 2 == 0
                                 : epoch_index % 2 == 1;
    if (closed_form)
        p = hybrid_closed_form(d, p);
    else
        sgd_epoch(d, p, cfg, st);
}

namespace {

FitReport run_descent(const SpikeDataset &d, Eigen::Index m_c,
                      const TrainConfig &cfg, int restart)
{
    const std::uint64_t seed = mix_seed(cfg.rng_seed, restart);
    Rng init_rng = make_rng(seed, 0);
    CmpParams p = init_params(d.neuron_count(), m_c, d, init_rng);
    TrainerState st{make_adam_state(d.neuron_count(), m_c),
                    make_rng(seed, 1)};

    FitReport report;
    report.restart_index = restart;
    report.nll_trace.reserve(cfg.epochs + 1);
    report.nll_trace.push_back(-conditional_log_likelihood(d, p));
    for (int e = 0; e < cfg.epochs; ++e) {
        if (cfg.reset_adam_each_epoch)
            st.adam = make_adam_state(d.neuron_count(), m_c);
        switch (cfg.algorithm) {
        case Algorithm::Sgd:
            sgd_epoch(d, p, cfg, st);
            break;
        case Algorithm::Em:
            em_epoch(d, p, cfg, st);
            break;
        case Algorithm::Hybrid:
            hybrid_epoch(d, p, cfg, st, e);
            break;
        }
        report.nll_trace.push_back(-conditional_log_likelihood(d, p));
    }
    report.final_params = std::move(p);
    return report;
}

} // namespace

FitReport fit(const SpikeDataset &d, Eigen::Index m_c, const TrainConfig &cfg)
{
    validate_dataset(d);
    validate_config(cfg, d.size());
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::optional<FitReport>> results(cfg.restarts);
    std::vector<std::string> failures(cfg.restarts);
    par::for_each(cfg.restarts, [&](std::ptrdiff_t r) {
        try {
            results[r] = run_descent(d, m_c, cfg, static_cast<int>(r));
        } catch (const Error &e) {
            failures[r] = e.what();
        } catch (const std::exception &e) {
            failures[r] = e.what();
        }
    });

    int best = -1;
    for (int r = 0; r < cfg.restarts; ++r) {
        if (!results[r]) {
            warn("fit: restart " + std::to_string(r) + " aborted: "
                 + failures[r]);
            continue;
        }
        if (best < 0 || results[r]->final_nll() < results[best]->final_nll())
            best = r;
    }
    if (best < 0)
        throw FitFailureError("fit: all restarts aborted");

    FitReport report = std::move(*results[best]);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

} // namespace cmp
