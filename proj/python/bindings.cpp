#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "optimist/divergence.hpp"
#include "optimist/errors.hpp"
#include "optimist/experiment.hpp"
#include "optimist/linear.hpp"
#include "optimist/mdp.hpp"
#include "optimist/oracles.hpp"
#include "optimist/tabular.hpp"

namespace py = pybind11;
using namespace optimist;

namespace {

DivergenceKind kind_of(const std::string& id) { return parse_divergence(id); }

ConjugateInput input_of(const std::vector<double>& z, double eps,
                        const std::vector<double>& ref, double h_remaining, long visits) {
  return {z, eps, ref, h_remaining, visits, static_cast<int>(z.size())};
}

py::dict log_to_dict(const RegretLog& log) {
  std::vector<double> vpi, cum_regret, cum_bonus;
  for (const EpisodeRecord& r : log.episodes) {
    vpi.push_back(r.vpi);
    cum_regret.push_back(r.cum_regret);
    cum_bonus.push_back(r.cum_bonus);
  }
  py::dict d;
  d["alg"] = log.alg;
  d["seed"] = log.seed;
  d["vstar"] = log.episodes.empty() ? 0.0 : log.episodes.front().vstar;
  d["vpi"] = vpi;
  d["cum_regret"] = cum_regret;
  d["cum_bonus"] = cum_bonus;
  d["optimistic_value"] = log.optimistic_value;
  d["infeasible_episodes"] = log.infeasible_episodes;
  d["optimism_violations"] = log.optimism_violations;
  d["alpha_scale"] = log.alpha_scale;
  return d;
}

ExperimentConfig config_of(const py::dict& config) {
  const py::module_ json = py::module_::import("json");
  const std::string text = py::str(json.attr("dumps")(config));
  return config_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimistic exploration for episodic MDPs";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

  py::class_<TabularMDP>(m, "TabularMDP")
      .def(py::init([](int S, int A, int H, int x1, std::vector<double> rewards,
                       std::vector<double> transitions) {
             return TabularMDP({S, A, H}, x1, std::move(rewards), std::move(transitions));
           }),
           py::arg("S"), py::arg("A"), py::arg("H"), py::arg("x1"), py::arg("rewards"),
           py::arg("transitions"))
      .def_property_readonly("S", &TabularMDP::num_states)
      .def_property_readonly("A", &TabularMDP::num_actions)
      .def_property_readonly("H", &TabularMDP::horizon)
      .def_property_readonly("x1", &TabularMDP::initial_state)
      .def_property_readonly("rewards", &TabularMDP::rewards)
      .def_property_readonly("transitions", &TabularMDP::transitions)
      .def("optimal_value", [](const TabularMDP& mdp) {
        return solve_bellman_optimality(mdp).values(0, mdp.initial_state());
      })
      .def("optimal_policy", [](const TabularMDP& mdp) {
        const OptimalSolution s = solve_bellman_optimality(mdp);
        std::vector<std::vector<int>> out(mdp.horizon(), std::vector<int>(mdp.num_states()));
        for (int h = 0; h < mdp.horizon(); ++h)
          for (int x = 0; x < mdp.num_states(); ++x) out[h][x] = s.policy.action(h, x);
        return out;
      });

  m.def("chain_mdp",
        [](int S, int H, double success, double slip_left, double small_reward,
           double large_reward) {
          return make_chain_mdp(S, H, {success, slip_left, small_reward, large_reward});
        },
        py::arg("S") = 6, py::arg("H") = 20, py::arg("success") = 0.6,
        py::arg("slip_left") = 0.1, py::arg("small_reward") = 0.05,
        py::arg("large_reward") = 1.0);
  m.def("random_mdp", &make_random_mdp, py::arg("S"), py::arg("A"), py::arg("H"),
        py::arg("seed"));

  m.def("divergence",
        [](const std::string& kind, const std::vector<double>& p,
           const std::vector<double>& ref) { return divergence(kind_of(kind), p, ref); },
        py::arg("kind"), py::arg("p"), py::arg("reference"));
  m.def("conjugate_upper",
        [](const std::string& kind, const std::vector<double>& z, double eps,
           const std::vector<double>& ref, double h_remaining, long visits) {
          return conjugate_upper(kind_of(kind), input_of(z, eps, ref, h_remaining, visits));
        },
        py::arg("kind"), py::arg("z"), py::arg("eps"), py::arg("reference"),
        py::arg("h_remaining") = 1.0, py::arg("visits") = 1);
  m.def("conjugate_bruteforce",
        [](const std::string& kind, const std::vector<double>& z, double eps,
           const std::vector<double>& ref, double grid_step, int refine_levels,
           double h_remaining, long visits) -> py::object {
          const GridConjugate g = conjugate_bruteforce(
              kind_of(kind), input_of(z, eps, ref, h_remaining, visits), grid_step,
              refine_levels);
          if (!g.feasible) return py::none();
          return py::float_(g.value);
        },
        py::arg("kind"), py::arg("z"), py::arg("eps"), py::arg("reference"),
        py::arg("grid_step") = 1e-2, py::arg("refine_levels") = 0,
        py::arg("h_remaining") = 1.0, py::arg("visits") = 1);
  m.def("conjugate_kl_linesearch",
        [](const std::vector<double>& z, double eps, const std::vector<double>& ref) {
          return conjugate_kl_linesearch(input_of(z, eps, ref, 1.0, 1));
        },
        py::arg("z"), py::arg("eps"), py::arg("reference"));

  m.def("confidence_width",
        [](const std::string& kind, std::int64_t N, int S, int A, int H, std::int64_t T,
           double delta) {
          WidthParams p;
          p.S = S;
          p.A = A;
          p.H = H;
          p.T = T;
          p.delta = delta;
          return confidence_width(kind_of(kind), N, p);
        },
        py::arg("kind"), py::arg("N"), py::arg("S"), py::arg("A"), py::arg("H"),
        py::arg("T"), py::arg("delta"));
  m.def("alpha_schedule", &alpha_schedule, py::arg("d"), py::arg("A"), py::arg("H"),
        py::arg("K"), py::arg("R"), py::arg("C_P"), py::arg("delta"),
        py::arg("lam") = 1.0);

  m.def("optimistic_value",
        [](const TabularMDP& mdp, const std::string& kind, double width) {
          const Shape sh = mdp.shape();
          const std::vector<double> widths(static_cast<std::size_t>(sh.H) * sh.S * sh.A,
                                           width);
          return optimistic_backup(sh, mdp.rewards(), ReferenceModel::from_model(mdp),
                                   kind_of(kind), widths)
              .values(0, mdp.initial_state());
        },
        py::arg("mdp"), py::arg("kind"), py::arg("width"),
        "V† at x1 with the true model as reference and a uniform width.");

  m.def("run_experiment",
        [](const py::dict& config) {
          const ExperimentConfig c = config_of(config);
          std::vector<RegretLog> logs;
          {
            py::gil_scoped_release release;
            logs = run_experiment(c);
          }
          py::list out;
          for (const RegretLog& log : logs) out.append(log_to_dict(log));
          return out;
        },
        py::arg("config"));
  m.def("run_csv",
        [](const py::dict& config) {
          const ExperimentConfig c = config_of(config);
          std::ostringstream out;
          {
            py::gil_scoped_release release;
            write_csv(out, run_experiment(c));
          }
          return out.str();
        },
        py::arg("config"));
  m.def("default_alpha_scale", &default_alpha_scale, py::arg("alg"));
  m.def("known_algorithms", &known_algorithms);
}
