#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gffperc/coupling.hpp"
#include "gffperc/errors.hpp"
#include "gffperc/operator.hpp"
#include "gffperc/percolation.hpp"
#include "gffperc/sampler.hpp"
#include "gffperc/spectral.hpp"
#include "gffperc/tree_gff.hpp"
#include "gffperc/walk_green.hpp"

namespace py = pybind11;
using namespace gffperc;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace

PYBIND11_MODULE(_gffperc, m) {
  m.doc() = "Zero-average GFF level-set percolation on regular graphs";

  // Translators are tried last-registered first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def_property_readonly("n", &Graph::n_vertices)
      .def_property_readonly("d", &Graph::degree)
      .def_property_readonly("seed", &Graph::seed)
      .def("neighbors", [](const Graph& g, int x) {
        auto nb = g.neighbors(x);
        return std::vector<int>(nb.begin(), nb.end());
      })
      .def("edges", &Graph::edges)
      .def("adjacent", &Graph::adjacent);

  m.def("random_regular", [](int n, int d, std::uint64_t seed) { return build_random_regular(n, d, seed); },
        py::arg("n"), py::arg("d"), py::arg("seed"));
  m.def("complete_graph", &complete_graph, py::arg("n"));
  m.def("is_treelike", &is_treelike, py::arg("g"), py::arg("x"), py::arg("r"));
  m.def("bfs_distances", &bfs_distances, py::arg("g"), py::arg("source"));
  m.def("spectral_gap", [](const Graph& g) { return spectral_gap(g); }, py::arg("g"));
  m.def("treelike_profile", &treelike_profile, py::arg("g"), py::arg("r_max"));

  m.def("zero_average_green", [](const Graph& g) { return zero_average_green(g).green(); },
        py::arg("g"), "Zero-average Green function G; the GFF covariance is G / 2.");
  m.def("covariance", [](const Graph& g) { return covariance_table(zero_average_green(g)); },
        py::arg("g"), "Covariance of the zero-average GFF.");

  m.def("default_k_max", &default_k_max, py::arg("gap"));
  m.def(
      "sample_field",
      [](const Graph& g, int k_max, std::uint64_t seed, std::uint64_t index) {
        return to_array(sample_decomposition(MidpointGraph(g), k_max, seed, index).first.values);
      },
      py::arg("g"), py::arg("k_max"), py::arg("seed"), py::arg("index") = 0,
      "Decomposition sample of the zero-average GFF truncated at k_max.");
  m.def(
      "sample_split",
      [](const Graph& g, int k_max, double t, std::uint64_t seed, std::uint64_t index) {
        auto s = sample_split(MidpointGraph(g), k_max, t, seed, index);
        return py::make_tuple(to_array(s.psi1.values), to_array(s.psi2.values),
                              to_array(s.psi.values));
      },
      py::arg("g"), py::arg("k_max"), py::arg("t"), py::arg("seed"), py::arg("index") = 0);
  m.def("sample_bar_z2", &sample_bar_z2, py::arg("g"), py::arg("seed"), py::arg("index") = 0);

  m.attr("NEG_INF") = kNegInf;
  m.def("tree_variance", &tree_variance, py::arg("d"));
  m.def("tree_green", &tree_green, py::arg("d"), py::arg("distance"));
  m.def(
      "sample_tree",
      [](int d, int depth, std::uint64_t seed, std::uint64_t index) {
        auto ts = sample_tree(d, depth, seed, index);
        return py::make_tuple(to_array(ts.phi), ts.parent);
      },
      py::arg("d"), py::arg("depth"), py::arg("seed"), py::arg("index") = 0,
      "Tree GFF on the ball of radius depth: (phi, parent) in BFS order.");
  m.def(
      "estimate_eta",
      [](int d, double h, double p, double gamma, int depth, long replicas, std::uint64_t seed,
         int threads) {
        auto e = estimate_eta(d, h, p, gamma, depth, replicas, seed, threads);
        py::dict out;
        out["eta"] = e.survival_fraction;
        out["ci_halfwidth"] = e.ci_halfwidth;
        out["mean_front"] = e.mean_front;
        return out;
      },
      py::arg("d"), py::arg("h"), py::arg("p") = 1.0, py::arg("gamma") = kNegInf,
      py::arg("depth") = 20, py::arg("replicas") = 10000, py::arg("seed") = 1,
      py::arg("threads") = 1);

  m.def("kernel_value", &kernel_value, py::arg("d"), py::arg("h"), py::arg("p"), py::arg("gamma"),
        py::arg("a"), py::arg("y"));
  m.def(
      "principal_eigenvalue",
      [](int d, double h, double p, double gamma, int n_nodes) {
        return principal_eigen(build_operator(d, h, p, gamma, n_nodes)).lambda;
      },
      py::arg("d"), py::arg("h"), py::arg("p") = 1.0, py::arg("gamma") = kNegInf,
      py::arg("n_nodes") = 256);
  m.def("lambda_h", &lambda_h, py::arg("d"), py::arg("h"), py::arg("n_nodes") = 256);
  m.def(
      "h_star",
      [](int d, double tol, int n_nodes) {
        HStarConfig cfg;
        cfg.n_nodes = n_nodes;
        return h_star(d, tol, cfg);
      },
      py::arg("d"), py::arg("tol") = 1e-6, py::arg("n_nodes") = 256);

  m.def(
      "coupling_D",
      [](const Graph& g, int r, int k_max, long replicas, std::uint64_t seed) {
        auto pair = find_coupling_pair(g, r);
        if (!pair) throw InvalidArgument("no treelike pair for this radius");
        auto plan = plan_coupling(g, pair->first, pair->second, r, k_max);
        py::array_t<double> out({static_cast<py::ssize_t>(replicas), py::ssize_t{2}});
        auto view = out.mutable_unchecked<2>();
        double worst = 0.0;
        for (long i = 0; i < replicas; ++i) {
          auto cs = build_coupled(plan, seed, i);
          auto [a, b] = measure_D(cs);
          view(i, 0) = a;
          view(i, 1) = b;
          worst = std::max(worst, identity_error(cs));
        }
        return py::make_tuple(out, worst);
      },
      py::arg("g"), py::arg("r"), py::arg("k_max"), py::arg("replicas"), py::arg("seed"),
      "Coupling discrepancies (D, D') per replica and the worst identity error.");

  m.def(
      "level_components",
      [](const Graph& g, py::array_t<double, py::array::c_style | py::array::forcecast> f,
         double h) {
        auto cs = level_components(g, to_vector(f), h);
        py::dict out;
        out["component"] = cs.component;
        out["sizes"] = cs.sizes;
        out["c_max"] = cs.c_max();
        out["c_sec"] = cs.c_sec();
        return out;
      },
      py::arg("g"), py::arg("f"), py::arg("h"));
  m.def(
      "small_component_fraction",
      [](const Graph& g, py::array_t<double, py::array::c_style | py::array::forcecast> f,
         double h, int r) { return small_component_fraction(g, to_vector(f), h, r); },
      py::arg("g"), py::arg("f"), py::arg("h"), py::arg("r"));
  m.def("l_from_p", &l_from_p, py::arg("p"));
  m.def(
      "giant_experiment",
      [](int n, int d, double h, std::uint64_t seed, int k_max) {
        auto r = giant_experiment(n, d, h, seed, k_max);
        py::dict out;
        out["n"] = r.n;
        out["d"] = r.d;
        out["h"] = r.h;
        out["seed"] = r.seed;
        out["k_max"] = r.k_max;
        out["gap"] = r.gap;
        out["level_size"] = r.level_size;
        out["c_max"] = r.c_max;
        out["c_sec"] = r.c_sec;
        return out;
      },
      py::arg("n"), py::arg("d"), py::arg("h"), py::arg("seed"), py::arg("k_max") = 0);
  m.def(
      "sprinkling_run_json",
      [](int n, int d, double h, double h_prime, double p, std::optional<double> t, double eta_ref,
         std::uint64_t seed) {
        SprinkleConfig cfg;
        cfg.n = n;
        cfg.d = d;
        cfg.h = h;
        cfg.h_prime = h_prime;
        cfg.p = p;
        cfg.t = t;
        cfg.eta_ref = eta_ref;
        return to_json_line(sprinkling_run(cfg, seed));
      },
      py::arg("n"), py::arg("d"), py::arg("h"), py::arg("h_prime"), py::arg("p"), py::arg("t"),
      py::arg("eta_ref"), py::arg("seed"));
}
