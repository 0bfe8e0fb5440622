#include "cmp/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cmp {

namespace {

using nlohmann::json;

constexpr const char *kCsvVersion = "# cmpfit-csv v1 ";

std::ofstream open_out(const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open for reading: " + path.string());
    return in;
}

void expect_version(std::istream &in, const std::string &kind,
                    const std::filesystem::path &path)
{
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path.string() + ": empty file");
    if (line != kCsvVersion + kind)
        throw IoError(path.string() + ": expected schema '" + kCsvVersion
                      + kind + "', found '" + line + "'");
}

double parse_double(const std::string &field, const std::filesystem::path &path,
                    std::size_t row, std::size_t col)
{
    double v = 0.0;
    const auto res =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw IoError(path.string() + ": row " + std::to_string(row)
                      + ", column " + std::to_string(col)
                      + ": not a number: '" + field + "'");
    return v;
}

long parse_count(const std::string &field, const std::filesystem::path &path,
                 std::size_t row, std::size_t col)
{
    long v = 0;
    const auto res =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()
        || v < 0)
        throw IoError(path.string() + ": row " + std::to_string(row)
                      + ", column " + std::to_string(col)
                      + ": not a nonnegative integer: '" + field + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string &line)
{
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

json vector_to_json(const Eigen::VectorXd &v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

json matrix_to_json(const Eigen::MatrixXd &m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vector_from_json(const json &a)
{
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

Eigen::MatrixXd matrix_from_json(const json &rows, Eigen::Index cols)
{
    Eigen::MatrixXd m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != cols)
            throw IoError("params: ragged matrix row");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), c) = rows[r][c].get<double>();
    }
    return m;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_dataset_csv(const std::filesystem::path &path, const SpikeDataset &d)
{
    validate_dataset(d);
    std::ofstream out = open_out(path);
    out << kCsvVersion << "dataset\n";
    out << "stimulus";
    for (Eigen::Index k = 1; k <= d.neuron_count(); ++k)
        out << ",n_" << k;
    out << "\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << format_double(d.stimuli[i].angle);
        for (Eigen::Index k = 0; k < d.neuron_count(); ++k)
            out << ',' << d.counts[i][k];
        out << "\n";
    }
}

SpikeDataset read_dataset_csv(const std::filesystem::path &path)
{
    std::ifstream in = open_in(path);
    expect_version(in, "dataset", path);

    std::string line;
    if (!std::getline(in, line))
        throw IoError(path.string() + ": missing header row");
    const std::vector<std::string> header = split_csv(line);
    if (header.empty() || header[0] != "stimulus")
        throw IoError(path.string() + ": first column must be 'stimulus'");
    const std::size_t m_n = header.size() - 1;
    if (m_n == 0)
        throw IoError(path.string() + ": no count columns");

    SpikeDataset d;
    std::size_t row = 2;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != header.size())
            throw IoError(path.string() + ": row " + std::to_string(row)
                          + ": expected " + std::to_string(header.size())
                          + " columns, found "
                          + std::to_string(fields.size()));
        const double angle = parse_double(fields[0], path, row, 1);
        if (!std::isfinite(angle))
            throw IoError(path.string() + ": row " + std::to_string(row)
                          + ": non-finite stimulus");
        CountVector n(static_cast<Eigen::Index>(m_n));
        for (std::size_t k = 0; k < m_n; ++k)
            n[static_cast<Eigen::Index>(k)] = static_cast<int>(
                parse_count(fields[k + 1], path, row, k + 2));
        d.stimuli.emplace_back(angle);
        d.counts.push_back(std::move(n));
    }
    validate_dataset(d);
    return d;
}

void write_params_json(const std::filesystem::path &path, const CmpParams &p)
{
    json j;
    j["schema"] = "cmpfit-params-v1";
    j["m_N"] = p.neuron_count();
    j["m_C"] = p.latent_dim();
    j["bias_n"] = vector_to_json(p.harmonium.bias_n.values);
    j["bias_c"] = vector_to_json(p.harmonium.bias_c.values);
    j["interaction"] = matrix_to_json(p.harmonium.interaction);
    j["link"] = matrix_to_json(p.link);
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

CmpParams read_params_json(const std::filesystem::path &path)
{
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw IoError(path.string() + ": invalid JSON: " + e.what());
    }
    if (j.value("schema", "") != "cmpfit-params-v1")
        throw IoError(path.string() + ": expected schema cmpfit-params-v1");
    const Eigen::Index m_n = j.at("m_N").get<Eigen::Index>();
    const Eigen::Index m_c = j.at("m_C").get<Eigen::Index>();
    CmpParams p;
    p.harmonium.bias_n = {Family::Poisson, vector_from_json(j.at("bias_n"))};
    p.harmonium.bias_c = {Family::Categorical,
                          vector_from_json(j.at("bias_c"))};
    p.harmonium.interaction = matrix_from_json(j.at("interaction"), m_n);
    p.link = matrix_from_json(j.at("link"), 2);
    if (p.harmonium.bias_n.values.size() != m_n
        || p.harmonium.bias_c.values.size() != m_c
        || p.harmonium.interaction.rows() != m_c || p.link.rows() != m_n)
        throw IoError(path.string() + ": inconsistent dimensions");
    return p;
}

void write_curve_csv(const std::filesystem::path &path, const std::string &kind,
                     const std::vector<Stimulus> &grid,
                     const Eigen::MatrixXd &rows,
                     const std::string &column_prefix, int first_index)
{
    std::ofstream out = open_out(path);
    out << kCsvVersion << kind << "\n";
    out << "z";
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
        out << ',' << column_prefix << '_' << (first_index + c);
    out << "\n";
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        out << format_double(grid[static_cast<std::size_t>(r)].angle);
        for (Eigen::Index c = 0; c < rows.cols(); ++c)
            out << ',' << format_double(rows(r, c));
        out << "\n";
    }
}

void write_correlations_csv(
    const std::filesystem::path &path,
    const std::vector<std::pair<Stimulus, Eigen::MatrixXd>> &matrices)
{
    std::ofstream out = open_out(path);
    out << kCsvVersion << "correlations\n";
    out << "stimulus,row,col,value\n";
    for (const auto &[z, m] : matrices)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                out << format_double(z.angle) << ',' << (r + 1) << ','
                    << (c + 1) << ',' << format_double(m(r, c)) << "\n";
}

void write_paired_correlations_csv(
    const std::filesystem::path &path,
    const std::vector<std::tuple<Stimulus, Eigen::MatrixXd, Eigen::MatrixXd>>
        &paired)
{
    std::ofstream out = open_out(path);
    out << kCsvVersion << "paired-correlations\n";
    out << "stimulus,row,col,value,source\n";
    for (const auto &[z, upper, lower] : paired)
        for (Eigen::Index r = 0; r < upper.rows(); ++r)
            for (Eigen::Index c = 0; c < upper.cols(); ++c) {
                const char *source =
                    r == c ? "diagonal" : (r < c ? "empirical" : "model");
                const double v =
                    r == c ? 1.0 : (r < c ? upper(r, c) : lower(r, c));
                out << format_double(z.angle) << ',' << (r + 1) << ','
                    << (c + 1) << ',' << format_double(v) << ',' << source
                    << "\n";
            }
}

void write_trace_csv(const std::filesystem::path &path,
                     const std::vector<std::string> &names,
                     const std::vector<std::vector<double>> &traces)
{
    if (names.size() != traces.size())
        throw IoError("trace: name/trace count mismatch");
    std::size_t len = 0;
    for (const auto &t : traces)
        len = std::max(len, t.size());
    std::ofstream out = open_out(path);
    out << kCsvVersion << "nll-trace\n";
    out << "epoch";
    for (const auto &n : names)
        out << ',' << n;
    out << "\n";
    for (std::size_t e = 0; e < len; ++e) {
        out << e;
        for (const auto &t : traces) {
            out << ',';
            if (e < t.size())
                out << format_double(t[e]);
        }
        out << "\n";
    }
}

void write_cv_gain_csv(const std::filesystem::path &path, const CvReport &r)
{
    std::ofstream out = open_out(path);
    out << kCsvVersion << "cv-relative-gain\n";
    out << "components,mean_heldout,se,relative_gain\n";
    for (std::size_t gi = 0; gi < r.component_grid.size(); ++gi) {
        const Eigen::Index i = static_cast<Eigen::Index>(gi);
        out << r.component_grid[gi] << ',' << format_double(r.mean_heldout[i])
            << ',' << format_double(r.se_heldout[i]) << ','
            << format_double(r.relative_gain[i]) << "\n";
    }
}

void write_cv_report_json(const std::filesystem::path &path, const CvReport &r)
{
    json j;
    j["schema"] = "cmpfit-cv-v1";
    j["component_grid"] = r.component_grid;
    j["heldout"] = matrix_to_json(r.heldout);
    j["mean_heldout"] = vector_to_json(r.mean_heldout);
    j["se_heldout"] = vector_to_json(r.se_heldout);
    j["relative_gain"] = vector_to_json(r.relative_gain);
    j["selected_components"] = r.selected_components;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

} // namespace cmp
