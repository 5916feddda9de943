#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gsbm/cli.hpp"
#include "gsbm/error.hpp"
#include "gsbm/experiments.hpp"
#include "gsbm/model.hpp"
#include "gsbm/prediction.hpp"
#include "gsbm/qve.hpp"
#include "gsbm/sampler.hpp"
#include "gsbm/spectra.hpp"

namespace py = pybind11;
using namespace gsbm;

namespace {

py::array_t<double> to_numpy(const SymMatrix& m) {
  const auto n = static_cast<py::ssize_t>(m.size());
  py::array_t<double> out({n, n});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

SymMatrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ValidationError("expected a square matrix");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const double* p = a.data();
  SymMatrix m = SymMatrix::from_upper(n, [&](std::size_t i, std::size_t j) { return p[i * n + j]; });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (p[i * n + j] != p[j * n + i]) throw ValidationError("matrix is not symmetric");
  return m;
}

std::string repr(const GsbmSpec& s) {
  std::ostringstream o;
  o << "GsbmSpec(gamma=" << s.gamma << ", alpha1=" << s.alpha1 << ", alpha2=" << s.alpha2
    << ", theta1=" << s.theta1 << ", theta2=" << s.theta2 << ", lambda_=" << s.lambda << ", n=";
  if (s.n) o << *s.n;
  else o << "None";
  o << ")";
  return o.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral toolkit for generalized stochastic block models";

  auto base = py::register_exception<Error>(m, "GsbmError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<GsbmSpec>(m, "GsbmSpec")
      .def(py::init([](double gamma, double alpha1, double alpha2, double theta1, double theta2, double lambda,
                       std::optional<std::int64_t> n) {
             return GsbmSpec{gamma, alpha1, alpha2, theta1, theta2, lambda, n};
           }),
           py::arg("gamma") = 0.5, py::arg("alpha1") = 1.0, py::arg("alpha2") = 1.0, py::arg("theta1") = 1.0,
           py::arg("theta2") = 1.0, py::arg("lambda_") = 0.0, py::arg("n") = py::none())
      .def_readwrite("gamma", &GsbmSpec::gamma)
      .def_readwrite("alpha1", &GsbmSpec::alpha1)
      .def_readwrite("alpha2", &GsbmSpec::alpha2)
      .def_readwrite("theta1", &GsbmSpec::theta1)
      .def_readwrite("theta2", &GsbmSpec::theta2)
      .def_readwrite("lambda_", &GsbmSpec::lambda)
      .def_readwrite("n", &GsbmSpec::n)
      .def("__eq__", [](const GsbmSpec& a, const GsbmSpec& b) { return a == b; })
      .def("__repr__", &repr);

  py::enum_<ShiftKind>(m, "ShiftKind")
      .value("HiddenCommunity", ShiftKind::HiddenCommunity)
      .value("Balanced", ShiftKind::Balanced);

  py::class_<SbmParams>(m, "SbmParams")
      .def(py::init([](std::int64_t n, std::int64_t n1, double p1, double p2, double q, bool zero_diagonal,
                       ShiftKind shift) { return SbmParams{n, n1, p1, p2, q, zero_diagonal, shift}; }),
           py::arg("n"), py::arg("n1"), py::arg("p1"), py::arg("p2"), py::arg("q"),
           py::arg("zero_diagonal") = true, py::arg("shift") = ShiftKind::HiddenCommunity)
      .def_readwrite("n", &SbmParams::n)
      .def_readwrite("n1", &SbmParams::n1)
      .def_readwrite("p1", &SbmParams::p1)
      .def_readwrite("p2", &SbmParams::p2)
      .def_readwrite("q", &SbmParams::q)
      .def_readwrite("zero_diagonal", &SbmParams::zero_diagonal)
      .def_readwrite("shift", &SbmParams::shift);

  py::class_<NoiseKind>(m, "NoiseKind")
      .def_static("gaussian", &NoiseKind::gaussian)
      .def_static("rademacher", &NoiseKind::rademacher)
      .def_static("centered_bernoulli", &NoiseKind::centered_bernoulli, py::arg("q"), py::arg("p1"), py::arg("p2"))
      .def_static("bernoulli_implied", &NoiseKind::bernoulli_implied, py::arg("spec"), py::arg("q"));

  m.def("validate_spec", &validate_spec, py::arg("spec"));
  m.def(
      "from_sbm",
      [](const SbmParams& p) {
        const auto c = from_sbm(p);
        return py::make_tuple(c.spec, c.scale, c.shift.value);
      },
      py::arg("params"), "Returns (spec, scale, shift value).");
  m.def(
      "realize",
      [](const GsbmSpec& s, std::int64_t n) {
        const auto r = realize(s, n);
        return py::make_tuple(r.spec, r.warning);
      },
      py::arg("spec"), py::arg("n"));

  m.def(
      "sample_gsbm",
      [](const GsbmSpec& spec, const NoiseKind& kind, std::uint64_t seed, std::uint64_t stream) {
        auto s = sample_gsbm(spec, kind, {seed, stream});
        return py::make_tuple(to_numpy(s.m), to_numpy(s.h), py::array_t<double>(s.u.size(), s.u.data()));
      },
      py::arg("spec"), py::arg("noise") = NoiseKind::gaussian(), py::arg("seed") = 0, py::arg("stream") = 0,
      "Returns (M, H, u).");
  m.def(
      "sample_sbm",
      [](const SbmParams& p, std::uint64_t seed, std::uint64_t stream) {
        return to_numpy(shift_and_rescale(sample_sbm_adjacency(p, {seed, stream}), p));
      },
      py::arg("params"), py::arg("seed") = 0, py::arg("stream") = 0, "Shifted and rescaled adjacency matrix.");

  py::class_<QveSolution>(m, "QveSolution")
      .def_readonly("z", &QveSolution::z)
      .def_readonly("m1", &QveSolution::m1)
      .def_readonly("mN", &QveSolution::mN)
      .def_readonly("m_avg", &QveSolution::m_avg)
      .def_readonly("residual", &QveSolution::residual)
      .def_readonly("iterations", &QveSolution::iterations);
  m.def(
      "solve_reduced", [](const GsbmSpec& s, Complex z) { return solve_reduced(s, z); }, py::arg("spec"),
      py::arg("z"));
  m.def("solve_reduced_algebraic", &solve_reduced_algebraic, py::arg("spec"), py::arg("z"));
  m.def(
      "density",
      [](const GsbmSpec& s, double from, double to, std::size_t points, double eta) {
        const auto c = density(s, from, to, points, eta);
        return py::make_tuple(c.grid, c.rho);
      },
      py::arg("spec"), py::arg("start"), py::arg("stop"), py::arg("points") = 600, py::arg("eta") = 1e-4,
      "Returns (x, rho).");

  py::enum_<EdgeMethod>(m, "EdgeMethod")
      .value("Discriminant", EdgeMethod::Discriminant)
      .value("DensitySupportScan", EdgeMethod::DensitySupportScan);
  py::class_<EdgeResult>(m, "EdgeResult")
      .def_readonly("l_plus", &EdgeResult::l_plus)
      .def_readonly("double_root_m", &EdgeResult::double_root_m)
      .def_readonly("method", &EdgeResult::method)
      .def_readonly("certified_window", &EdgeResult::certified_window);
  py::class_<OutlierPrediction>(m, "OutlierPrediction")
      .def_readonly("lambda_", &OutlierPrediction::lambda)
      .def_readonly("z", &OutlierPrediction::z)
      .def_readonly("lambda_c", &OutlierPrediction::lambda_c)
      .def_readonly("gap", &OutlierPrediction::gap)
      .def_readonly("l_plus", &OutlierPrediction::l_plus)
      .def_readonly("method", &OutlierPrediction::method)
      .def_readonly("marginal", &OutlierPrediction::marginal)
      .def_readonly("diagnostic", &OutlierPrediction::diagnostic);
  m.def("find_upper_edge", &find_upper_edge, py::arg("spec"), py::arg("preferred") = EdgeMethod::Discriminant);
  m.def(
      "predict_outlier", [](const GsbmSpec& s, double l) { return predict_outlier(s, l); }, py::arg("spec"),
      py::arg("lambda_"));
  m.def(
      "critical_lambda", [](const GsbmSpec& s) { return critical_lambda(s); }, py::arg("spec"));
  m.def("hidden_threshold", &hidden_threshold, py::arg("q"), py::arg("gamma"), py::arg("n"));
  m.def("unbalanced_threshold", &unbalanced_threshold, py::arg("q"), py::arg("n"));
  m.def("hidden_lambda1", &hidden_lambda1, py::arg("w"), py::arg("q"), py::arg("gamma"));
  m.def("unbalanced_lambda1", &unbalanced_lambda1, py::arg("w"), py::arg("q"));

  m.def(
      "eigen_symmetric",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, std::size_t k) {
        const auto es = eigen_symmetric(from_numpy(a), k);
        return py::make_tuple(es.values, es.vectors);
      },
      py::arg("matrix"), py::arg("want_vectors") = 0,
      "Returns (eigenvalues descending, leading eigenvectors).");
  m.def(
      "spectral_measure",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, const std::vector<double>& u) {
        const auto sm = spectral_measure(from_numpy(a), u);
        return py::make_tuple(sm.values, sm.weights);
      },
      py::arg("matrix"), py::arg("u"), "Returns (eigenvalues, weights <u, v_k>^2).");
  m.def(
      "overlap", [](const std::vector<int>& labels, std::int64_t n1) { return overlap(labels, n1); },
      py::arg("labels"), py::arg("n1"));
  m.def(
      "detect_communities",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, const GsbmSpec& s) {
        const auto c = detect_communities(from_numpy(a), s);
        return py::make_tuple(c.labels, c.overlap);
      },
      py::arg("matrix"), py::arg("spec"), "Returns (labels, overlap).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line front end in process. Returns (exit code, stdout, stderr).");
}
