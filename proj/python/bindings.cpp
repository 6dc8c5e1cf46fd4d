#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zorsn/campaign.hpp"
#include "zorsn/estimators.hpp"
#include "zorsn/harness.hpp"
#include "zorsn/qp.hpp"
#include "zorsn/solvers.hpp"
#include "zorsn/theory.hpp"

namespace py = pybind11;
using namespace zorsn;

namespace {

CountedOracle wrap(const py::function& f, int dim) {
  return CountedOracle(dim, [f](const Vector& x) { return f(x).cast<double>(); });
}

SketchStrategy strategy_of(const std::string& s) { return sketch_strategy_from_string(s); }

template <class Problem>
void bind_smooth(py::class_<Problem>& c) {
  c.def_property_readonly("dim", &Problem::dim)
      .def("value", &Problem::value, py::arg("x"))
      .def("gradient", &Problem::gradient, py::arg("x"))
      .def("hessian", &Problem::hessian, py::arg("x"))
      .def_property_readonly("f_star", &Problem::f_star)
      .def_property_readonly("x_star", &Problem::x_star)
      .def_property_readonly("start_point", &Problem::start_point)
      .def_property_readonly("constants", [](const Problem& p) {
        const ProblemConstants k = p.constants();
        return py::dict(py::arg("L1") = k.L1, py::arg("mu") = k.mu, py::arg("L2") = k.L2);
      });
}

}  // namespace

PYBIND11_MODULE(_zorsn, m) {
  m.doc() = "Zeroth-order randomized subspace Newton methods";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ContractViolation>(m, "ContractViolation", base);
  py::register_exception<InvalidProblem>(m, "InvalidProblem", base);
  py::register_exception<InvalidSketch>(m, "InvalidSketch", base);
  py::register_exception<StepRejected>(m, "StepRejected", base);
  py::register_exception<PreconditionError>(m, "PreconditionError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  // ---- problems
  py::class_<QuadraticProblem> quad(m, "QuadraticProblem");
  bind_smooth(quad);
  quad.def_property_readonly("eigenvalues", &QuadraticProblem::eigenvalues)
      .def_property_readonly("eigenvectors", &QuadraticProblem::eigenvectors);
  m.def("make_quadratic",
        [](int n, const std::vector<double>& spectrum, std::uint64_t seed) {
          return make_quadratic(n, spectrum, seed);
        },
        py::arg("n"), py::arg("spectrum"), py::arg("seed") = 0);

  py::class_<SmoothConvexProblem> smooth(m, "SmoothConvexProblem");
  bind_smooth(smooth);
  m.def("make_smooth_convex", &make_smooth_convex, py::arg("n"), py::arg("rows"), py::arg("mu"),
        py::arg("seed") = 0);

  py::class_<ToyAttackProblem>(m, "ToyAttackProblem")
      .def_property_readonly("dim", &ToyAttackProblem::dim)
      .def_property_readonly("classes", &ToyAttackProblem::classes)
      .def_property_readonly("label", &ToyAttackProblem::label)
      .def_property_readonly("omega", &ToyAttackProblem::omega)
      .def_property_readonly("epsilon", &ToyAttackProblem::epsilon)
      .def_property_readonly("x_nat", &ToyAttackProblem::x_nat)
      .def("value", &ToyAttackProblem::value, py::arg("x"))
      .def("probabilities", &ToyAttackProblem::probabilities, py::arg("x"));
  m.def("make_toy_attack", &make_toy_attack, py::arg("n"), py::arg("classes"), py::arg("weights_seed"),
        py::arg("instance_seed"), py::arg("epsilon"), py::arg("omega") = 1.0, py::arg("label") = -1);

  // ---- solvers
  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &SolverConfig::gamma)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("m", &SolverConfig::m)
      .def_readwrite("m_max", &SolverConfig::m_max)
      .def_readwrite("k_max", &SolverConfig::k_max)
      .def_readwrite("query_budget", &SolverConfig::query_budget)
      .def_readwrite("lambda_min", &SolverConfig::lambda_min)
      .def_readwrite("lambda_max", &SolverConfig::lambda_max)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_property(
          "sketch_strategy", [](const SolverConfig& c) { return to_string(c.sketch_strategy); },
          [](SolverConfig& c, const std::string& s) { c.sketch_strategy = strategy_of(s); })
      .def_readwrite("f_target", &SolverConfig::f_target)
      .def_readwrite("tolerance", &SolverConfig::tolerance)
      .def_readwrite("zoha_directions", &SolverConfig::zoha_directions)
      .def_readwrite("zoha_lambda", &SolverConfig::zoha_lambda)
      .def_readwrite("record_iterates", &SolverConfig::record_iterates);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("k", &IterationRecord::k)
      .def_readonly("f_value", &IterationRecord::f_value)
      .def_readonly("queries_cumulative", &IterationRecord::queries_cumulative)
      .def_readonly("m_used", &IterationRecord::m_used)
      .def_readonly("accepted", &IterationRecord::accepted)
      .def_readonly("step_norm", &IterationRecord::step_norm);

  py::class_<RunTrace>(m, "RunTrace")
      .def_readonly("records", &RunTrace::records)
      .def_property_readonly("outcome", [](const RunTrace& t) { return to_string(t.outcome); })
      .def_readonly("final_x", &RunTrace::final_x)
      .def_readonly("final_f", &RunTrace::final_f)
      .def_readonly("total_queries", &RunTrace::total_queries)
      .def_readonly("iterates", &RunTrace::iterates);

  m.def("zo_rsn_solve",
        [](const py::function& f, const Vector& x0, const SolverConfig& cfg, std::optional<Matrix> basis) {
          CountedOracle oracle = wrap(f, static_cast<int>(x0.size()));
          return zo_rsn_solve(oracle, x0, cfg, basis);
        },
        py::arg("f"), py::arg("x0"), py::arg("config"), py::arg("basis") = std::nullopt);
  m.def("zo_rsn_sqp_solve",
        [](const py::function& f, const Vector& center, double radius, double threshold, const SolverConfig& cfg) {
          CountedOracle oracle = wrap(f, static_cast<int>(center.size()));
          return zo_rsn_sqp_solve(oracle, BoxRegion{center, radius}, threshold, cfg);
        },
        py::arg("f"), py::arg("center"), py::arg("radius"), py::arg("threshold"), py::arg("config"));
  m.def("zoha_gauss_dc_solve",
        [](const py::function& f, const Vector& x0, const SolverConfig& cfg) {
          CountedOracle oracle = wrap(f, static_cast<int>(x0.size()));
          return zoha_gauss_dc_solve(oracle, x0, cfg);
        },
        py::arg("f"), py::arg("x0"), py::arg("config"));

  // Sketched finite-difference model at x along the columns of s.
  m.def("sketched_model",
        [](const py::function& f, const Vector& x, const Matrix& s, double alpha) {
          CountedOracle oracle = wrap(f, static_cast<int>(x.size()));
          Sketch sk;
          sk.columns = s;
          sk.strategy = SketchStrategy::Gaussian;
          const SketchedModel model = build_model(oracle, x, sk, alpha);
          return py::make_tuple(model.g_tilde, model.h_tilde, oracle.queries());
        },
        py::arg("f"), py::arg("x"), py::arg("s"), py::arg("alpha"));
  m.def("model_query_count", &model_query_count, py::arg("m"));

  m.def("solve_box_qp",
        [](const Vector& g, const Matrix& h, double gamma, const Vector& lower, const Vector& upper) {
          return solve_box_qp(BoxQP{g, h, gamma, lower, upper});
        },
        py::arg("g"), py::arg("h"), py::arg("gamma"), py::arg("lower"), py::arg("upper"));

  // ---- theory
  py::class_<TheoryInputs>(m, "TheoryInputs")
      .def(py::init<>())
      .def_readwrite("n", &TheoryInputs::n)
      .def_readwrite("m", &TheoryInputs::m)
      .def_readwrite("mu", &TheoryInputs::mu)
      .def_readwrite("L1", &TheoryInputs::L1)
      .def_readwrite("L2", &TheoryInputs::L2)
      .def_readwrite("mu_hat", &TheoryInputs::mu_hat)
      .def_readwrite("L_hat", &TheoryInputs::L_hat)
      .def_readwrite("gamma", &TheoryInputs::gamma)
      .def_readwrite("alpha", &TheoryInputs::alpha)
      .def_readwrite("rho", &TheoryInputs::rho)
      .def_readwrite("delta", &TheoryInputs::delta)
      .def_readwrite("sigma", &TheoryInputs::sigma)
      .def_readwrite("epsilon", &TheoryInputs::epsilon)
      .def_readwrite("lambda_s1", &TheoryInputs::lambda_s1)
      .def_readwrite("f0_gap", &TheoryInputs::f0_gap)
      .def_readwrite("omega", &TheoryInputs::omega);

  m.def("theorem1_constants", [](const TheoryInputs& t) {
    const Theorem1Constants c = theorem1_constants(t);
    return py::dict(py::arg("C1") = c.C1, py::arg("C2") = c.C2, py::arg("C3") = c.C3, py::arg("B") = c.B);
  });
  m.def("iteration_bound", [](const TheoryInputs& t) {
    const IterationBound b = iteration_bound(t);
    return py::dict(py::arg("exact") = b.exact, py::arg("weaker") = b.weaker, py::arg("beta1") = b.beta1,
                    py::arg("contraction") = b.contraction);
  });
  m.def("corollary_alpha_consistent", &corollary_alpha_consistent);
  m.def("speedup_factors", [](const TheoryInputs& t) {
    const SpeedupFactors s = speedup_factors(t);
    return py::dict(py::arg("iteration") = s.iteration, py::arg("query") = s.query,
                    py::arg("query_advantage") = s.query_advantage);
  });
  m.def("compute_rho_exact",
        [](const Matrix& h, const std::string& strategy, int mm) { return compute_rho_exact(h, strategy_of(strategy), mm); },
        py::arg("h"), py::arg("strategy"), py::arg("m"));

  // ---- command-line entry points, output captured
  m.def("run_command",
        [](const std::string& command, const std::string& config, std::optional<std::uint64_t> seed,
           std::optional<std::string> out_dir, std::optional<int> jobs) {
          CliOverrides o{seed, out_dir, jobs};
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            if (command == "solve") code = cmd_solve(config, o, out, err);
            else if (command == "bench") code = cmd_bench(config, o, out, err);
            else if (command == "verify-theory") code = cmd_verify_theory(config, o, out, err);
            else if (command == "attack-demo") code = cmd_attack_demo(config, o, out, err);
            else throw ConfigError("unknown command '" + command + "'");
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("command"), py::arg("config"), py::arg("seed") = std::nullopt, py::arg("out_dir") = std::nullopt,
        py::arg("jobs") = std::nullopt);
}
