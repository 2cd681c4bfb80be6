// python bindings for the main operations: grids, parameters, the stationary
// solver, the adjoint gradient and the projected-gradient optimizer.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rbm/io.hpp"
#include "rbm/optimizer.hpp"

namespace py = pybind11;
using namespace rbm;

namespace {

// python-facing bundle: owns the discretization plus the scenario pieces so
// lifetimes stay simple on the python side
struct Problem {
  std::unique_ptr<Discretization> d;
  ControlTriple controls;
  Targets targets;
  CostWeights weights;
  StateSolution state;
  SolveReport last_report;

  Problem(int nx, int ny, int nz, double l, double L, const NondimParams& p)
      : d(std::make_unique<Discretization>(BoxGrid(nx, ny, nz, l, L), p)) {
    controls = d->make_controls();
    targets = zero_targets(d->grid);
    weights.gamma2 = 1.0;
    weights.gamma3 = 1.0;
    weights.gamma4 = weights.gamma5 = weights.gamma6 = 1e-2;
  }

  void set_conduction_controls() {
    controls = d->make_controls();
    for (std::size_t f = 0; f < d->bottom.size(); ++f)
      controls.phi2.at(0, f) = d->prm.theta_c_nd;
  }
  void set_phi2_uniform(double v) {
    for (std::size_t f = 0; f < d->bottom.size(); ++f) controls.phi2.at(0, f) = v;
  }
  void set_targets_basic_state() { targets = basic_state_targets(*d); }

  py::dict solve(double tol, int max_iters) {
    SolveOptions so;
    so.tol = tol;
    so.max_iters = max_iters;
    auto [s, rep] = picard_solve(*d, controls, so);
    state = std::move(s);
    last_report = rep;
    py::dict out;
    out["converged"] = rep.converged;
    out["picard_iters"] = rep.picard_iters;
    out["residuals"] = rep.residual_history;
    out["apriori_lhs"] = rep.apriori_lhs;
    out["apriori_rhs"] = rep.apriori_rhs;
    out["max_abs_div"] = max_abs_div(d->grid, state.u);
    out["u_h1"] = h1_norm(d->grid, state.u);
    out["theta_h1"] = h1_norm(d->grid, state.theta);
    return out;
  }

  double theta_at(int i, int j, int k) { return state.theta(i, j, k); }
  double max_speed() {
    return std::max({max_abs(state.u.u1), max_abs(state.u.u2), max_abs(state.u.u3)});
  }

  double cost_total() { return cost(*d, state, controls, targets, weights).total; }

  py::dict optimize(double tol, int max_iters, std::uint64_t seed) {
    OptimizerOptions opts;
    opts.tol = tol;
    opts.max_iters = max_iters;
    opts.seed = seed;
    OptimizeResult res = projected_gradient(*d, controls, targets, weights, opts);
    controls = res.controls;
    state = res.state;
    py::dict out;
    out["converged"] = res.report.converged;
    out["iterations"] = res.report.iterations;
    out["stationarity"] = res.report.stationarity;
    out["cost_history"] = res.report.cost_history;
    return out;
  }

  double gap(double C_ref) { return uniqueness_gap(*d, controls, C_ref); }
  double beta0(double C_ref) { return regular_point_beta0(*d, state, C_ref); }

  void write_vtk_file(const std::string& path) {
    write_vtk(path, d->grid, state);
  }
};

}  // namespace

PYBIND11_MODULE(rbmcore, m) {
  m.doc() = "stationary Rayleigh-Benard-Marangoni solver and boundary control";

  py::class_<NondimParams>(m, "NondimParams")
      .def(py::init<>())
      .def_readwrite("Pr", &NondimParams::Pr)
      .def_readwrite("R", &NondimParams::R)
      .def_readwrite("b", &NondimParams::b)
      .def_readwrite("M", &NondimParams::M)
      .def_readwrite("B", &NondimParams::B)
      .def_readwrite("l", &NondimParams::l)
      .def_readwrite("L", &NondimParams::L)
      .def_readwrite("theta_c", &NondimParams::theta_c_nd);

  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def(py::init<>())
      .def_readwrite("rho0", &PhysicalParams::rho0)
      .def_readwrite("mu", &PhysicalParams::mu)
      .def_readwrite("K", &PhysicalParams::K_cond)
      .def_readwrite("cp", &PhysicalParams::cp)
      .def_readwrite("alpha", &PhysicalParams::alpha)
      .def_readwrite("gamma", &PhysicalParams::gamma_sigma)
      .def_readwrite("g", &PhysicalParams::g_mag)
      .def_readwrite("h", &PhysicalParams::h_exch)
      .def_readwrite("d", &PhysicalParams::d)
      .def_readwrite("l1", &PhysicalParams::l1)
      .def_readwrite("L1", &PhysicalParams::L1)
      .def_readwrite("theta_c", &PhysicalParams::theta_c)
      .def_readwrite("theta_a", &PhysicalParams::theta_a);

  m.def("nondimensionalize", &nondimensionalize);

  py::class_<Problem>(m, "Problem")
      .def(py::init<int, int, int, double, double, const NondimParams&>(),
           py::arg("nx"), py::arg("ny"), py::arg("nz"), py::arg("l") = 1.0,
           py::arg("L") = 1.0, py::arg("params") = NondimParams{})
      .def("set_conduction_controls", &Problem::set_conduction_controls)
      .def("set_phi2_uniform", &Problem::set_phi2_uniform)
      .def("set_targets_basic_state", &Problem::set_targets_basic_state)
      .def("set_weights",
           [](Problem& p, double g1, double g2, double g3, double g4, double g5,
              double g6) {
             p.weights.gamma1 = g1;
             p.weights.gamma2 = g2;
             p.weights.gamma3 = g3;
             p.weights.gamma4 = g4;
             p.weights.gamma5 = g5;
             p.weights.gamma6 = g6;
           })
      .def("solve", &Problem::solve, py::arg("tol") = 1e-11,
           py::arg("max_iters") = 50)
      .def("optimize", &Problem::optimize, py::arg("tol") = 1e-6,
           py::arg("max_iters") = 100, py::arg("seed") = 0)
      .def("theta_at", &Problem::theta_at)
      .def("max_speed", &Problem::max_speed)
      .def("cost_total", &Problem::cost_total)
      .def("uniqueness_gap", &Problem::gap, py::arg("C_ref") = 1.0)
      .def("beta0", &Problem::beta0, py::arg("C_ref") = 1.0)
      .def("write_vtk", &Problem::write_vtk_file);

  m.def("basic_state_theta", [](double theta_c, double B, double z) {
    return theta_c - theta_c * B / (1.0 + B) * z;
  });
}
