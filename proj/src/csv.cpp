#include "pdmfc/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pdmfc/dynamics.hpp"
#include "pdmfc/errors.hpp"

namespace pdmfc {
namespace {

void append_number(std::string& out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    out += buf;
}

void write_all(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("short write: " + path);
}

} // namespace

void write_series_csv(const std::string& path, const std::vector<std::string>& names,
                      const std::vector<const std::vector<double>*>& columns) {
    if (names.size() != columns.size() || columns.empty())
        throw std::invalid_argument("write_series_csv: names and columns must match");
    const std::size_t rows = columns.front()->size();
    for (const auto* c : columns)
        if (c->size() != rows)
            throw std::invalid_argument("write_series_csv: ragged columns");

    std::string out;
    out.reserve(rows * columns.size() * 12 + 64);
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c) out += ',';
        out += names[c];
    }
    out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            append_number(out, (*columns[c])[r]);
        }
        out += '\n';
    }
    write_all(path, out);
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path,
                                                  std::vector<std::string>* names) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(f, line)) throw IoError("empty csv: " + path);

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.empty()) throw IoError("csv header has no columns: " + path);
    if (names) *names = header;

    std::vector<std::vector<double>> cols(header.size());
    std::size_t row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= cols.size())
                throw IoError(path + ": row " + std::to_string(row) + " has extra columns");
            try {
                cols[c].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(path + ": row " + std::to_string(row) +
                              " has a non-numeric cell '" + cell + "'");
            }
            ++c;
        }
        if (c != cols.size())
            throw IoError(path + ": row " + std::to_string(row) + " has missing columns");
    }
    return cols;
}

void write_field_csv(const std::string& path, const ValueField& field,
                     const std::string& value_name) {
    std::string out = "time_h,mode,theta_C," + value_name + "\n";
    out.reserve(static_cast<std::size_t>(field.n_time) * field.d * field.n_nodes * 24);
    for (int n = 0; n < field.n_time; ++n)
        for (int i = 0; i < field.d; ++i)
            for (int k = 0; k < field.n_nodes; ++k) {
                append_number(out, field.time(n));
                out += ',';
                out += std::to_string(i);
                out += ',';
                append_number(out, field.theta(k));
                out += ',';
                append_number(out, field.at(n, i, k));
                out += '\n';
            }
    write_all(path, out);
}

void write_control_csv(const std::string& path, const ControlField& alpha,
                       const ScenarioConfig& cfg) {
    std::string out = "time_h,from_mode,to_mode,theta_C,alpha,alpha_hat,total\n";
    out.reserve(static_cast<std::size_t>(alpha.n_time) * alpha.d * alpha.d *
                alpha.n_nodes * 32);
    for (int n = 0; n < alpha.n_time; ++n) {
        const double t = n * alpha.dt;
        for (int i = 0; i < alpha.d; ++i)
            for (int j = 0; j < alpha.d; ++j) {
                if (j == i) continue;
                for (int k = 0; k < alpha.n_nodes; ++k) {
                    const double th = alpha.theta(k);
                    const double a = alpha.at(n, i, j, k);
                    const double h = hat_alpha(t, StatePoint{i, th}, j, cfg.safety);
                    append_number(out, t);
                    out += ',';
                    out += std::to_string(i);
                    out += ',';
                    out += std::to_string(j);
                    out += ',';
                    append_number(out, th);
                    out += ',';
                    append_number(out, a);
                    out += ',';
                    append_number(out, h);
                    out += ',';
                    append_number(out, a + h);
                    out += '\n';
                }
            }
    }
    write_all(path, out);
}

void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs,
                            const Grid& g) {
    std::string out = "trajectory,time_h,mode,theta_C\n";
    out.reserve(trajs.size() * static_cast<std::size_t>(g.n_time_points()) * 24);
    for (std::size_t m = 0; m < trajs.size(); ++m) {
        const std::vector<int> modes = modes_on_grid(trajs[m], g);
        for (int n = 0; n < g.n_time_points(); ++n) {
            out += std::to_string(m);
            out += ',';
            append_number(out, g.time(n));
            out += ',';
            out += std::to_string(modes[static_cast<std::size_t>(n)]);
            out += ',';
            append_number(out, trajs[m].theta_samples[static_cast<std::size_t>(n)]);
            out += '\n';
        }
    }
    write_all(path, out);
}

void write_history_csv(const std::string& path, const std::vector<UzawaIterationRow>& rows) {
    std::string out = "iteration,grad_norm,w_estimate,tracking_rmse,wallclock_s\n";
    for (const auto& r : rows) {
        out += std::to_string(r.iteration);
        out += ',';
        append_number(out, r.grad_norm);
        out += ',';
        append_number(out, r.w_estimate);
        out += ',';
        append_number(out, r.tracking_rmse);
        out += ',';
        append_number(out, r.wallclock_s);
        out += '\n';
    }
    write_all(path, out);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    if (f.bad()) throw IoError("read failed: " + path);
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("short write: " + path);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace pdmfc
