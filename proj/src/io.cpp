#include "netgame/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace netgame {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mat read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv_matrix: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("read_csv_matrix: non-numeric cell '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("read_csv_matrix: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_csv_matrix: empty file " + path);
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_csv_matrix(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv_matrix: cannot open " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_full(m(i, j));
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec, int block_size) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  out << "iteration,agent,component,value\n";
  for (std::size_t k = 0; k < rec.iterates.size(); ++k) {
    const Vec& x = rec.iterates[k];
    const std::int64_t step = rec.iterate_steps[k];
    const Eigen::Index n_agents = x.size() / block_size;
    for (Eigen::Index i = 0; i < n_agents; ++i)
      for (int c = 0; c < block_size; ++c)
        out << step << ',' << i << ',' << c << ','
            << format_full(x[i * block_size + c]) << '\n';
    if (k < rec.sigma_iterates.size()) {
      const Vec& sigma = rec.sigma_iterates[k];
      for (Eigen::Index c = 0; c < sigma.size(); ++c)
        out << step << ",sigma," << c << ',' << format_full(sigma[c]) << '\n';
    }
  }
}

void write_series_csv(const std::string& path, const std::string& value_name,
                      const std::vector<std::int64_t>& steps, const std::vector<double>& values) {
  if (steps.size() != values.size())
    throw DimensionError("write_series_csv: steps/values length mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_series_csv: cannot open " + path);
  out << "step," << value_name << '\n';
  for (std::size_t i = 0; i < steps.size(); ++i)
    out << steps[i] << ',' << format_full(values[i]) << '\n';
}

void write_async_csv(const std::string& path, const TrajectoryRecord& rec,
                     const std::vector<int>& active_agents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_async_csv: cannot open " + path);
  out << "step,active_agent,residual\n";
  std::size_t r = 0;
  for (std::size_t k = 0; k < active_agents.size(); ++k) {
    const std::int64_t step = static_cast<std::int64_t>(k) + 1;
    out << step << ',' << active_agents[k] << ',';
    if (r < rec.residual_steps.size() && rec.residual_steps[r] == step) {
      out << format_full(rec.residuals[r]);
      ++r;
    }
    out << '\n';
  }
}

nlohmann::json certificate_json(const Certificate& cert) {
  nlohmann::json j;
  switch (cert.kind) {
    case CertificateKind::nwe: j["kind"] = "nwe"; break;
    case CertificateKind::pnwe: j["kind"] = "pnwe"; break;
    case CertificateKind::gnwe: j["kind"] = "gnwe"; break;
  }
  j["passed"] = cert.passed;
  j["tolerance"] = cert.tolerance;
  j["fixed_point_residual"] = cert.fixed_point_residual;
  if (cert.kind == CertificateKind::gnwe) {
    j["feasibility_violation"] = cert.feasibility_violation;
    j["complementarity"] = cert.complementarity;
  }
  return j;
}

nlohmann::json summary_json(const TrajectoryRecord& rec) {
  nlohmann::json j;
  j["converged"] = rec.converged;
  j["iterations"] = rec.iterations;
  j["tolerance"] = rec.tolerance;
  j["final_residual"] = rec.final_residual;
  if (rec.certificate) j["certificate"] = certificate_json(*rec.certificate);
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace netgame
