#pragma once

#include <filesystem>

#include "cmp/io.hpp"
#include "cmp/synth.hpp"

namespace cmp {

struct SynthCommand {
    GroundTruthSpec truth;
    SamplingPlan plan;
    std::filesystem::path out_dir = ".";
    int grid_points = 100;
};

struct FitCommand {
    std::filesystem::path dataset;
    std::filesystem::path out_dir = ".";
    std::vector<Algorithm> algorithms = {Algorithm::Hybrid};
    int components = 8; // mixture components, m_C + 1
    TrainConfig train;
    int grid_points = 100;
    bool timing = false; // timing goes to stderr only; files stay reproducible
};

struct CvCommand {
    std::filesystem::path dataset;
    std::filesystem::path out_dir = ".";
    std::vector<int> grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int folds = 10;
    TrainConfig train;
};

struct ReportCommand {
    std::filesystem::path dataset;
    std::filesystem::path params;
    std::filesystem::path out_dir = ".";
    std::vector<double> stimuli = {0.0, 0.33 * 3.14159265358979323846,
                                   0.67 * 3.14159265358979323846};
    int grid_points = 100;
};

// Ground-truth params (JSON), dataset (CSV), tuning/weight-curve and
// per-stimulus correlation tables.
void cmd_synth(const SynthCommand &cmd);

// Fits the requested algorithm(s); writes the fit report, per-algorithm
// params, NLL traces and model curve/correlation tables.
void cmd_fit(const FitCommand &cmd);

// 10-fold CV over the component grid; writes the CV report and the
// relative-gain table.
void cmd_cv(const CvCommand &cmd);

// Paired correlation tables (empirical upper / model lower triangle) at the
// chosen stimuli plus the model weight curves.
void cmd_report(const ReportCommand &cmd);

} // namespace cmp
