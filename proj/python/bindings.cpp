#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <vector>

#include "cclab/bounds.hpp"
#include "cclab/couplings.hpp"
#include "cclab/experiments.hpp"
#include "cclab/gaussian.hpp"
#include "cclab/measures.hpp"
#include "cclab/rng.hpp"

namespace py = pybind11;
using namespace cclab;

namespace {

DiscreteMeasure measure_of(const std::vector<double>& v) {
  return DiscreteMeasure::from_vector(v);
}

py::dict report_to_dict(const nlohmann::json& j);

py::object json_to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::object:
      return report_to_dict(j);
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case nlohmann::json::value_t::string:
      return py::cast(j.get<std::string>());
    case nlohmann::json::value_t::boolean:
      return py::cast(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::cast(j.get<long long>());
    case nlohmann::json::value_t::number_unsigned:
      return py::cast(j.get<unsigned long long>());
    case nlohmann::json::value_t::number_float:
      return py::cast(j.get<double>());
    default:
      return py::none();
  }
}

py::dict report_to_dict(const nlohmann::json& j) {
  py::dict out;
  for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
  return out;
}

ExperimentConfig config_from_kwargs(const std::string& experiment, long long n,
                                    std::vector<int> k, int d, std::vector<double> rho_grid,
                                    std::optional<double> delta, long long samples,
                                    std::uint64_t seed, int threads) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.n = n;
  cfg.k_values = std::move(k);
  cfg.d = d;
  cfg.rho_grid = std::move(rho_grid);
  cfg.delta = delta;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.threads = threads;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_cclab, m) {
  m.doc() = "couplings, transport distances and exceedance bounds";
  m.attr("__version__") = kVersion;

  // gaussian core
  m.def("gaussian_pdf", &gaussian_pdf, py::arg("x"));
  m.def("gaussian_cdf", &gaussian_cdf, py::arg("x"));
  m.def("gaussian_tail", &gaussian_tail, py::arg("x"));
  m.def("gaussian_quantile", &gaussian_quantile, py::arg("p"));
  m.def("gaussian_eval", &gaussian_eval, py::arg("x"), "returns the (pdf, cdf) pair");
  m.def("conditional_mean_above", &conditional_mean_above, py::arg("a"));

  py::class_<GaussianThreshold>(m, "GaussianThreshold")
      .def_readonly("w", &GaussianThreshold::w)
      .def_readonly("y", &GaussianThreshold::y)
      .def_readonly("p", &GaussianThreshold::p)
      .def_readonly("a", &GaussianThreshold::a)
      .def("__repr__", [](const GaussianThreshold& t) {
        return "GaussianThreshold(w=" + std::to_string(t.w) + ", y=" + std::to_string(t.y) +
               ", p=" + std::to_string(t.p) + ")";
      });
  m.def("solve_threshold", &solve_threshold, py::arg("w"),
        "unique y with pdf(y)/cdf(y) = w, plus p = cdf(y) and a = 1/(y+w)");

  py::class_<TruncatedGaussianMoments>(m, "TruncatedGaussianMoments")
      .def_readonly("lower", &TruncatedGaussianMoments::lower)
      .def_readonly("mean", &TruncatedGaussianMoments::mean)
      .def_readonly("variance", &TruncatedGaussianMoments::variance);
  m.def("truncated_moments", &truncated_moments, py::arg("a"));

  m.def("laplace_S", &laplace_S, py::arg("alpha"), py::arg("rho"));
  py::class_<LaplacePartials>(m, "LaplacePartials")
      .def_readonly("S", &LaplacePartials::S)
      .def_readonly("S_rho", &LaplacePartials::S_rho)
      .def_readonly("S_alpha", &LaplacePartials::S_alpha)
      .def_readonly("S_rho_rho", &LaplacePartials::S_rho_rho)
      .def_readonly("S_alpha_rho", &LaplacePartials::S_alpha_rho)
      .def_readonly("S_alpha_alpha", &LaplacePartials::S_alpha_alpha);
  m.def("laplace_partials_at_zero", &laplace_partials_at_zero);
  m.def("kappa_and_V", &kappa_and_V);
  m.def("chernoff_tilt", &chernoff_tilt);
  m.def("rate_function",
        [](double x, double rho) { return rate_function(x, rho).value; }, py::arg("x"),
        py::arg("rho"));
  m.def("chernoff_bound", &chernoff_bound, py::arg("rho"), py::arg("d"));

  // empirical measures
  py::class_<SortedSample>(m, "SortedSample")
      .def_readonly("atoms", &SortedSample::atoms)
      .def_readonly("ordering", &SortedSample::ordering);
  m.def("decompose",
        [](const std::vector<double>& s) { return decompose(s); }, py::arg("s"));

  py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
      .def(py::init([](std::vector<double> atoms, std::vector<double> weights) {
             return DiscreteMeasure(std::move(atoms), std::move(weights));
           }),
           py::arg("atoms"), py::arg("weights"))
      .def_static("from_vector", &measure_of, py::arg("s"))
      .def_property_readonly("atoms", &DiscreteMeasure::atoms)
      .def_property_readonly("weights", &DiscreteMeasure::weights)
      .def("mean", &DiscreteMeasure::mean)
      .def("__eq__", [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return a == b; })
      .def("__len__", &DiscreteMeasure::size);

  m.def("wasserstein_1",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return wasserstein_1(measure_of(a), measure_of(b));
        },
        py::arg("a"), py::arg("b"), "W1 between the uniform measures on two atom lists");
  m.def("wasserstein_1_measures", &wasserstein_1, py::arg("mu"), py::arg("nu"));
  m.def("wasserstein_to_gaussian",
        [](const std::vector<double>& s) { return wasserstein_to_gaussian(measure_of(s)); },
        py::arg("s"));
  m.def("exceedance",
        [](const std::vector<double>& s, double w) { return exceedance(measure_of(s), w); },
        py::arg("s"), py::arg("w") = 1.0);
  m.def("ks_distance", [](const std::vector<double>& s) { return ks_distance(s); },
        py::arg("s"));
  m.def("in_E_n", [](const std::vector<double>& s, double d) { return in_E_n(s, d); },
        py::arg("s"), py::arg("delta"));
  m.def("in_Gamma_n", [](const std::vector<double>& s) { return in_Gamma_n(s); },
        py::arg("s"));
  m.def("default_delta", &default_delta, py::arg("n"));
  m.def("cube_root_delta", &cube_root_delta, py::arg("n"), py::arg("C") = 1.0);
  m.def("gaussian_quantile_grid", &gaussian_quantile_grid, py::arg("n"));
  m.def("gamma_mass_estimate",
        [](const std::function<bool(std::vector<double>)>& pred, std::size_t n,
           long long samples, std::uint64_t seed) {
          const auto wrapped = [&](std::span<const double> s) {
            return pred(std::vector<double>(s.begin(), s.end()));
          };
          const auto r = gamma_mass_estimate(wrapped, n, samples, seed);
          return py::make_tuple(r.estimate, r.std_error);
        },
        py::arg("predicate"), py::arg("n"), py::arg("samples"), py::arg("seed") = 12345);

  // couplings
  m.def("sample_uniform_SnB",
        [](std::size_t n, std::vector<std::int32_t> block, std::uint64_t seed) {
          Rng rng(seed);
          return sample_uniform_SnB(n, IndexBlock(std::move(block)), rng);
        },
        py::arg("n"), py::arg("block"), py::arg("seed") = 12345);
  m.def("convex_combination_law",
        [](const std::vector<std::vector<double>>& vectors, const std::vector<double>& lambda) {
          return convex_combination_law(vectors, lambda);
        },
        py::arg("vectors"), py::arg("weights"));
  m.def("coupled_combination_law",
        [](const std::vector<std::vector<double>>& vectors, const std::vector<double>& lambda) {
          return coupled_combination_law(vectors, lambda);
        },
        py::arg("vectors"), py::arg("weights"));
  m.def("push_measure",
        [](const std::vector<double>& sorted_atoms, const std::vector<Permutation>& perms) {
          SortedSample t{sorted_atoms, identity_permutation(sorted_atoms.size())};
          return push_measure(t, perms);
        },
        py::arg("sorted_atoms"), py::arg("perms"));
  m.def("box_samples",
        [](double rho, int d, long long count, std::uint64_t seed) {
          const auto box = BoxProductCoupling::at_rho(rho, d);
          Rng rng(seed);
          std::vector<std::vector<double>> out(count, std::vector<double>(d));
          for (auto& row : out) box.sample(rng, row);
          return out;
        },
        py::arg("rho"), py::arg("d"), py::arg("count"), py::arg("seed") = 12345,
        "joint draws from the box-product coupling at quantile shift rho");
  m.def("box_copula_density",
        [](const std::vector<double>& r, double p) {
          BoxProductCoupling box{-gaussian_quantile(p), p, static_cast<int>(r.size())};
          return box.copula_density(r);
        },
        py::arg("r"), py::arg("p"));
  m.def("coupling_mass",
        [](const std::vector<Permutation>& perms, std::vector<double> lo,
           std::vector<double> hi) {
          return PermutationCoupling::from_permutations(perms).mass(
              UnitBox(std::move(lo), std::move(hi)));
        },
        py::arg("perms"), py::arg("lo"), py::arg("hi"));
  m.def("exact_box_moments",
        [](int mm, int d, std::vector<double> lo, std::vector<double> hi) {
          const auto r = exact_box_moments(mm, d, UnitBox(std::move(lo), std::move(hi)));
          return py::make_tuple(r.mean, r.second);
        },
        py::arg("m"), py::arg("d"), py::arg("lo"), py::arg("hi"));
  m.def("brute_force_box_moments",
        [](int mm, int d, std::vector<double> lo, std::vector<double> hi) {
          const auto r = brute_force_box_moments(mm, d, UnitBox(std::move(lo), std::move(hi)));
          return py::make_tuple(r.mean, r.second);
        },
        py::arg("m"), py::arg("d"), py::arg("lo"), py::arg("hi"));

  // bounds
  m.def("first_moment_bound", &first_moment_bound, py::arg("w"));
  m.def("plain_certificate_H", &plain_certificate_H, py::arg("y"), py::arg("w"));
  py::class_<DualCertificate>(m, "DualCertificate")
      .def_readonly("w", &DualCertificate::w)
      .def_readonly("weights", &DualCertificate::weights)
      .def_readonly("breakpoints", &DualCertificate::breakpoints)
      .def_readonly("gains", &DualCertificate::gains)
      .def_readonly("plain_value", &DualCertificate::plain_value)
      .def_readonly("refined_bound", &DualCertificate::refined_bound);
  m.def("refined_certificate",
        [](double w, const std::vector<double>& lambda) {
          return refined_certificate(w, lambda);
        },
        py::arg("w"), py::arg("weights"));
  m.def("check_feasibility",
        [](const DualCertificate& cert, const std::vector<double>& z) {
          return check_feasibility(cert, z);
        },
        py::arg("certificate"), py::arg("z"));
  m.def("fuzz_feasibility", &fuzz_feasibility, py::arg("certificate"), py::arg("trials"),
        py::arg("seed") = 12345);
  m.def("equal_weights_minimum", &equal_weights_minimum, py::arg("k"), py::arg("Cexp"));
  m.def("conv_exceedance_bound", &conv_exceedance_bound, py::arg("k"), py::arg("delta"));
  m.def("box_lower_bound",
        [](int d, double rho, long long samples, std::uint64_t seed) {
          const auto r = box_lower_bound(d, rho, samples, seed);
          py::dict out;
          out["d"] = r.d;
          out["rho"] = r.rho;
          out["samples"] = r.samples;
          out["mc_estimate"] = r.mc_estimate;
          out["std_error"] = r.std_error;
          out["analytic_floor"] = r.analytic_floor;
          return out;
        },
        py::arg("d"), py::arg("rho"), py::arg("samples") = 100000, py::arg("seed") = 12345);

  // experiments
  m.def("default_rho_grid", &default_rho_grid);
  m.def("run_experiment",
        [](const std::string& experiment, long long n, std::vector<int> k, int d,
           std::vector<double> rho_grid, std::optional<double> delta, long long samples,
           std::uint64_t seed, int threads) {
          nlohmann::json report;
          ExperimentConfig cfg =
              config_from_kwargs(experiment, n, std::move(k), d, std::move(rho_grid), delta,
                                 samples, seed, threads);
          cfg.out = "none";  // keep the report off stdout
          const int code = run_experiment(cfg, &report);
          if (code == 3) throw std::invalid_argument("invalid experiment configuration");
          return report_to_dict(report);
        },
        py::arg("experiment"), py::arg("n") = 10000, py::arg("k") = std::vector<int>{},
        py::arg("d") = 16, py::arg("rho_grid") = std::vector<double>{},
        py::arg("delta") = std::nullopt, py::arg("samples") = 2000, py::arg("seed") = 12345,
        py::arg("threads") = 1,
        "runs one experiment in process and returns the report as a dict");
  m.def("reordering_counts",
        [](const std::vector<double>& t, const std::function<bool(std::vector<double>)>& J,
           int m_size) {
          const auto wrapped = [&](std::span<const double> s) {
            return J(std::vector<double>(s.begin(), s.end()));
          };
          const auto counts = oracle_reordering_counts(decompose(t), wrapped, m_size);
          py::dict blocks;
          for (const auto& [block, c] : counts.per_block)
            blocks[py::tuple(py::cast(block))] = c;
          return py::make_tuple(counts.total, blocks);
        },
        py::arg("t"), py::arg("predicate"), py::arg("m"));
}
