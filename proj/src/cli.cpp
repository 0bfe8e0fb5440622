#include "cmp/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

#include <json.hpp>

namespace cmp {

namespace {

namespace fs = std::filesystem;

void ensure_out_dir(const fs::path &dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": "
                      + ec.message());
}

std::vector<Stimulus> make_grid(int points)
{
    if (points < 1)
        throw ConfigError("grid points must be positive");
    std::vector<Stimulus> grid;
    grid.reserve(points);
    for (int i = 0; i < points; ++i)
        grid.emplace_back(std::numbers::pi * i / points);
    return grid;
}

std::vector<Stimulus> distinct_stimuli(const SpikeDataset &d)
{
    std::set<double> angles;
    for (const Stimulus &z : d.stimuli)
        angles.insert(z.angle);
    std::vector<Stimulus> out;
    for (double a : angles)
        out.emplace_back(a);
    return out;
}

std::vector<std::pair<Stimulus, Eigen::MatrixXd>>
model_correlations(const CmpParams &p, const std::vector<Stimulus> &stimuli)
{
    std::vector<std::pair<Stimulus, Eigen::MatrixXd>> out;
    out.reserve(stimuli.size());
    for (const Stimulus &z : stimuli)
        out.emplace_back(z, conditioned_moments(p, z).correlation);
    return out;
}

SpikeDataset load_dataset(const fs::path &path)
{
    if (!fs::exists(path))
        throw IoError("dataset not found: " + path.string()
                      + " (produce one with `cmpfit synth` or supply a CSV)");
    return read_dataset_csv(path);
}

} // namespace

void cmd_synth(const SynthCommand &cmd)
{
    ensure_out_dir(cmd.out_dir);
    const CmpParams truth = generate_ground_truth(cmd.truth);
    const SpikeDataset data = sample_dataset(truth, cmd.plan);
    const std::vector<Stimulus> grid = make_grid(cmd.grid_points);

    write_params_json(cmd.out_dir / "ground_truth.json", truth);
    write_dataset_csv(cmd.out_dir / "dataset.csv", data);
    write_curve_csv(cmd.out_dir / "ground_truth_tuning_curves.csv",
                    "tuning-curves", grid, tuning_curves(truth, grid), "mu",
                    1);
    write_curve_csv(cmd.out_dir / "ground_truth_weight_curves.csv",
                    "weight-curves", grid, weight_curve(truth, grid), "w", 0);
    write_correlations_csv(
        cmd.out_dir / "ground_truth_correlations.csv",
        model_correlations(truth, plan_stimuli(cmd.plan)));
}

void cmd_fit(const FitCommand &cmd)
{
    if (cmd.components < 1)
        throw ConfigError("components must be >= 1");
    const SpikeDataset data = load_dataset(cmd.dataset);
    ensure_out_dir(cmd.out_dir);
    const std::vector<Stimulus> grid = make_grid(cmd.grid_points);
    const std::vector<Stimulus> data_stimuli = distinct_stimuli(data);

    std::vector<std::string> names;
    std::vector<std::vector<double>> traces;
    nlohmann::json report;
    report["schema"] = "cmpfit-report-v1";
    report["components"] = cmd.components;

    for (Algorithm alg : cmd.algorithms) {
        TrainConfig cfg = cmd.train;
        cfg.algorithm = alg;
        const FitReport fit_report = fit(data, cmd.components - 1, cfg);
        const std::string name = algorithm_name(alg);
        if (cmd.timing)
            std::cerr << "fit[" << name << "]: "
                      << fit_report.wall_time_seconds << " s\n";

        names.push_back(name);
        traces.push_back(fit_report.nll_trace);
        nlohmann::json entry;
        entry["algorithm"] = name;
        entry["restart_index"] = fit_report.restart_index;
        entry["final_nll"] = fit_report.final_nll();
        entry["nll_trace"] = fit_report.nll_trace;
        report["fits"][name] = std::move(entry);

        const CmpParams &p = fit_report.final_params;
        write_params_json(cmd.out_dir / ("params_" + name + ".json"), p);
        write_curve_csv(cmd.out_dir / ("weight_curves_" + name + ".csv"),
                        "weight-curves", grid, weight_curve(p, grid), "w", 0);
        write_curve_csv(cmd.out_dir / ("tuning_curves_" + name + ".csv"),
                        "tuning-curves", grid, tuning_curves(p, grid), "mu",
                        1);
        write_correlations_csv(
            cmd.out_dir / ("model_correlations_" + name + ".csv"),
            model_correlations(p, data_stimuli));
    }

    write_trace_csv(cmd.out_dir / "nll_trace.csv", names, traces);
    std::ofstream out(cmd.out_dir / "fit_report.json", std::ios::binary);
    if (!out)
        throw IoError("cannot write fit_report.json");
    out << report.dump(2) << "\n";
}

void cmd_cv(const CvCommand &cmd)
{
    const SpikeDataset data = load_dataset(cmd.dataset);
    ensure_out_dir(cmd.out_dir);
    const CvReport report = kfold_cv(data, cmd.grid, cmd.train, cmd.folds);
    write_cv_report_json(cmd.out_dir / "cv_report.json", report);
    write_cv_gain_csv(cmd.out_dir / "cv_relative_gain.csv", report);
}

void cmd_report(const ReportCommand &cmd)
{
    const SpikeDataset data = load_dataset(cmd.dataset);
    if (!std::filesystem::exists(cmd.params))
        throw IoError("fitted params not found: " + cmd.params.string()
                      + " (produce them with `cmpfit fit`)");
    const CmpParams params = read_params_json(cmd.params);
    if (params.neuron_count() != data.neuron_count())
        throw ConfigError("params/dataset neuron count mismatch");
    ensure_out_dir(cmd.out_dir);

    const std::vector<StimulusCorrelation> empirical =
        empirical_correlations(data);
    std::vector<std::tuple<Stimulus, Eigen::MatrixXd, Eigen::MatrixXd>> paired;
    for (double requested : cmd.stimuli) {
        // snap to the nearest recorded stimulus so the empirical triangle is
        // defined; the snapped angle is what the table reports
        const Stimulus want(requested);
        const StimulusCorrelation *nearest = &empirical.front();
        auto circ_dist = [](double a, double b) {
            const double d = std::abs(a - b);
            return std::min(d, std::numbers::pi - d);
        };
        for (const StimulusCorrelation &sc : empirical)
            if (circ_dist(sc.stimulus.angle, want.angle)
                < circ_dist(nearest->stimulus.angle, want.angle))
                nearest = &sc;
        const Stimulus z = nearest->stimulus;
        paired.emplace_back(z, nearest->correlation,
                            conditioned_moments(params, z).correlation);
    }
    write_paired_correlations_csv(cmd.out_dir / "paired_correlations.csv",
                                  paired);
    const std::vector<Stimulus> grid = make_grid(cmd.grid_points);
    write_curve_csv(cmd.out_dir / "report_weight_curves.csv", "weight-curves",
                    grid, weight_curve(params, grid), "w", 0);
}

} // namespace cmp
