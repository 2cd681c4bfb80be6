#include "rbm/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rbm {

namespace fs = std::filesystem;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << body;
}

void write_vtk(const fs::path& path, const BoxGrid& g, const StateSolution& s,
               const std::string& title) {
  std::ostringstream os;
  os.precision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  os << "DATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << g.nx << " " << g.ny << " " << g.nz << "\n";
  os << "ORIGIN " << 0.5 * g.hx << " " << 0.5 * g.hy << " " << 0.5 * g.hz << "\n";
  os << "SPACING " << g.hx << " " << g.hy << " " << g.hz << "\n";
  os << "POINT_DATA " << g.ncells() << "\n";
  os << "SCALARS theta double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) os << s.theta(i, j, k) << "\n";
  os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) os << s.p(i, j, k) << "\n";
  os << "VECTORS velocity double\n";
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double u = 0.5 * (s.u.U1(i, j, k) + s.u.U1(i + 1, j, k));
        double v = 0.5 * (s.u.U2(i, j, k) + s.u.U2(i, j + 1, k));
        double w = 0.5 * (s.u.U3(i, j, k) + s.u.U3(i, j, k + 1));
        os << u << " " << v << " " << w << "\n";
      }
  write_text(path, os.str());
}

void write_state_csv(const fs::path& path, const BoxGrid& g, const StateSolution& s) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,z,u1,u2,u3,p,theta\r\n";
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double u = 0.5 * (s.u.U1(i, j, k) + s.u.U1(i + 1, j, k));
        double v = 0.5 * (s.u.U2(i, j, k) + s.u.U2(i, j + 1, k));
        double w = 0.5 * (s.u.U3(i, j, k) + s.u.U3(i, j, k + 1));
        os << g.xc(i) << "," << g.yc(j) << "," << g.zc(k) << "," << u << ","
           << v << "," << w << "," << s.p(i, j, k) << "," << s.theta(i, j, k)
           << "\r\n";
      }
  write_text(path, os.str());
}

void write_boundary_csv(const fs::path& path, const BoundaryField& f,
                        const std::string& value_prefix) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y,z";
  for (int c = 0; c < f.ncomp; ++c)
    os << "," << value_prefix << (f.ncomp > 1 ? std::to_string(c + 1) : "");
  os << "\r\n";
  for (std::size_t q = 0; q < f.region->size(); ++q) {
    const auto& bf = f.region->faces[q];
    os << bf.cx << "," << bf.cy << "," << bf.cz;
    for (int c = 0; c < f.ncomp; ++c) os << "," << f.at(c, q);
    os << "\r\n";
  }
  write_text(path, os.str());
}

void write_history_csv(const fs::path& path, const std::vector<double>& cost,
                       const std::vector<double>& steps,
                       const std::vector<double>& vi_residuals) {
  std::ostringstream os;
  os.precision(17);
  os << "iter,J,step,residual\r\n";
  for (std::size_t q = 0; q < cost.size(); ++q) {
    os << q << "," << cost[q] << ",";
    if (q > 0 && q - 1 < steps.size()) os << steps[q - 1];
    os << ",";
    if (q < vi_residuals.size()) os << vi_residuals[q];
    os << "\r\n";
  }
  write_text(path, os.str());
}

std::string solve_report_json(const SolveReport& rep) {
  nlohmann::ordered_json j;
  j["picard_iters"] = rep.picard_iters;
  j["residuals"] = rep.residual_history;
  j["apriori_lhs"] = rep.apriori_lhs;
  j["apriori_rhs"] = rep.apriori_rhs;
  j["converged"] = rep.converged;
  j["used_schur_path"] = rep.used_schur_path;
  return j.dump(2) + "\n";
}

std::string optimality_report_json(const OptimalityReport& rep) {
  nlohmann::ordered_json j;
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["stationarity"] = rep.stationarity;
  j["vi_residual_g"] = rep.vi_residual_g;
  j["vi_residual_phi1"] = rep.vi_residual_phi1;
  j["vi_residual_phi2"] = rep.vi_residual_phi2;
  j["cost_history"] = rep.cost_history;
  j["step_history"] = rep.step_history;
  if (rep.second_order_min_quotient)
    j["second_order_min_quotient"] = *rep.second_order_min_quotient;
  else
    j["second_order_min_quotient"] = nullptr;
  j["multiplier_bound_lhs"] = rep.multiplier_bound_lhs;
  j["multiplier_bound_rhs"] = rep.multiplier_bound_rhs;
  return j.dump(2) + "\n";
}

std::string cost_breakdown_json(const CostBreakdown& cb) {
  nlohmann::ordered_json j;
  j["vorticity_term"] = cb.vorticity_term;
  j["velocity_tracking"] = cb.velocity_tracking;
  j["temperature_tracking"] = cb.temperature_tracking;
  j["g_norm_term"] = cb.g_norm_term;
  j["phi1_norm_term"] = cb.phi1_norm_term;
  j["phi2_norm_term"] = cb.phi2_norm_term;
  j["total"] = cb.total;
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

void write_manifest(const fs::path& out_dir, const std::string& config_echo,
                    const std::vector<fs::path>& artifacts) {
  nlohmann::ordered_json j;
  j["config"] = config_echo;
  nlohmann::ordered_json h = nlohmann::ordered_json::object();
  for (const auto& a : artifacts) {
    std::ostringstream hex;
    hex << std::hex << fnv1a64_file(a);
    h[a.filename().string()] = hex.str();
  }
  j["artifacts"] = h;
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace rbm
