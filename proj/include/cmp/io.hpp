#pragma once

#include <filesystem>
#include <string>

#include "cmp/eval.hpp"

namespace cmp {

// Shortest round-trip decimal representation (std::to_chars); all CSV/JSON
// output is byte-stable across runs.
std::string format_double(double v);

// Dataset CSV: "# cmpfit-csv v1 dataset", then "stimulus,n_1,...,n_m".
void write_dataset_csv(const std::filesystem::path &path,
                       const SpikeDataset &d);
SpikeDataset read_dataset_csv(const std::filesystem::path &path);

void write_params_json(const std::filesystem::path &path, const CmpParams &p);
CmpParams read_params_json(const std::filesystem::path &path);

// One row per grid stimulus; column_prefix numbers the value columns
// (e.g. "w" -> w_0, w_1, ...; first_index selects 0- or 1-based names).
void write_curve_csv(const std::filesystem::path &path,
                     const std::string &kind,
                     const std::vector<Stimulus> &grid,
                     const Eigen::MatrixXd &rows,
                     const std::string &column_prefix, int first_index);

// Tidy per-stimulus matrices: stimulus,row,col,value.
void write_correlations_csv(
    const std::filesystem::path &path,
    const std::vector<std::pair<Stimulus, Eigen::MatrixXd>> &matrices);

// Paired matrices: upper triangle empirical, lower triangle model.
void write_paired_correlations_csv(
    const std::filesystem::path &path,
    const std::vector<std::tuple<Stimulus, Eigen::MatrixXd, Eigen::MatrixXd>>
        &paired);

void write_trace_csv(const std::filesystem::path &path,
                     const std::vector<std::string> &names,
                     const std::vector<std::vector<double>> &traces);

void write_cv_gain_csv(const std::filesystem::path &path, const CvReport &r);
void write_cv_report_json(const std::filesystem::path &path, const CvReport &r);

} // namespace cmp
