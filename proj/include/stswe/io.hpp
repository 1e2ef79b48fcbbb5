#pragma once

// Plain-text output: legacy-VTK unstructured grids with per-cell and
// per-point scalars, run-record CSVs, solver-diagnostic CSVs, and the
// key = value config reader.

#include "stswe/adapt.hpp"
#include "stswe/solver.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stswe {

inline void write_vtk(const SpaceTimeMesh& mesh, const std::string& path,
                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_fields = {},
                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_fields = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n";
  out << "space-time mesh\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Point& p : mesh.vertices) out << p.x << " " << p.t << " 0\n";
  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const Triangle& t : mesh.triangles) out << "3 " << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int k = 0; k < mesh.n_triangles(); ++k) out << "5\n";
  if (!cell_fields.empty()) {
    out << "CELL_DATA " << mesh.n_triangles() << "\n";
    for (const auto& [name, values] : cell_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int k = 0; k < mesh.n_triangles(); ++k) out << values[k] << "\n";
    }
  }
  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    for (const auto& [name, values] : point_fields) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (int v = 0; v < mesh.n_vertices(); ++v) out << values[v] << "\n";
    }
  }
}

// Vertex samples of a field for VTK point data.
inline Eigen::VectorXd sample_at_vertices(const FieldFunction& f) {
  const SpaceTimeMesh& mesh = *f.space->mesh;
  Eigen::VectorXd out(mesh.n_vertices());
  // vertex dofs of a continuous space coincide with mesh vertices
  if (f.space->continuity == Continuity::Continuous) {
    for (int v = 0; v < mesh.n_vertices(); ++v) out[v] = f.coeffs[v];
    return out;
  }
  for (int v = 0; v < mesh.n_vertices(); ++v)
    out[v] = f.evaluate(mesh.vertices[v].x, mesh.vertices[v].t);
  return out;
}

inline void write_record_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_record_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "# schema = stswe-record-1\n";
  out << "# case = " << rec.case_name << "\n";
  for (const auto& [k, v] : rec.params) out << "# " << k << " = " << v << "\n";
  out << "refine_step,n_elements,n_dofs,estimate,err_L2_zeta,err_L2_u,err_L2_sigma,err_U,newton_iters\n";
  for (const StepRow& r : rec.rows)
    out << r.refine_step << "," << r.n_elements << "," << r.n_dofs << "," << r.estimate << ","
        << r.err_l2_zeta << "," << r.err_l2_u << "," << r.err_l2_sigma << "," << r.err_u << ","
        << r.newton_iters << "\n";
}

inline void write_newton_csv(const std::vector<NewtonHistoryRow>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_newton_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "iteration,residual_v_norm,step_halvings\n";
  for (const auto& r : history) out << r.iteration << "," << r.representer_norm << "," << r.halvings << "\n";
}

inline void write_series_csv(const std::string& path, const std::string& abscissa_name,
                             const std::vector<double>& abscissa, const std::string& value_name,
                             const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_series_csv: cannot open " + path);
  out << std::setprecision(17);
  out << abscissa_name << "," << value_name << "\n";
  for (std::size_t i = 0; i < abscissa.size(); ++i) out << abscissa[i] << "," << values[i] << "\n";
}

// Timeline of a sliced run plus the per-slice records.
template <typename SliceResults>
inline void write_slice_outputs(const SliceResults& slices, const std::string& dir) {
  std::ofstream out(dir + "/timeline.csv");
  if (!out) throw std::runtime_error("write_slice_outputs: cannot open " + dir + "/timeline.csv");
  out << std::setprecision(17);
  out << "slice,t_lo,t_hi,n_dofs,estimate,err_L2_zeta,err_L2_u,err_L2_sigma,err_U\n";
  for (std::size_t s = 0; s < slices.size(); ++s) {
    const StepRow& last = slices[s].solution.record.rows.back();
    out << s << "," << slices[s].t_range.lo << "," << slices[s].t_range.hi << "," << last.n_dofs
        << "," << last.estimate << "," << last.err_l2_zeta << "," << last.err_l2_u << ","
        << last.err_l2_sigma << "," << last.err_u << "\n";
    write_record_csv(slices[s].solution.record, dir + "/record_slice" + std::to_string(s) + ".csv");
  }
}

// key = value file with [section] headers; keys are returned as "section.key"
// ("" section for keys before any header). '#' starts a comment.
inline std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_config: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line, section;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("read_config: expected key = value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

} // namespace stswe
