#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mdilate/dilation.hpp"
#include "mdilate/hermitian.hpp"
#include "mdilate/pipeline.hpp"
#include "mdilate/verifier.hpp"

namespace py = pybind11;
using namespace mdilate;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ComplexMatrix to_matrix(const CArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  std::vector<Complex> data(a.data(), a.data() + rows * cols);
  return ComplexMatrix(rows, cols, std::move(data));
}

CArray to_array(const ComplexMatrix& m) {
  CArray out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

HermitianMatrix to_hermitian(const CArray& a) { return HermitianMatrix::from(to_matrix(a)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "m-isometric dilations of m-concave operators";

  py::register_exception<Error>(m, "MdilateError");

  m.def("eigh", [](const CArray& x) {
    const auto d = eigh(to_hermitian(x));
    return py::make_tuple(d.values, to_array(d.basis));
  }, py::arg("x"));
  m.def("sqrt_psd", [](const CArray& x) { return to_array(sqrt_psd(to_hermitian(x)).matrix()); },
        py::arg("x"));
  m.def("pinv_sqrt", [](const CArray& x) {
    const auto p = pinv_sqrt(to_hermitian(x));
    return py::make_tuple(to_array(p.inv_sqrt.matrix()), to_array(p.range_projector.matrix()), p.rank);
  }, py::arg("x"));

  m.def("beta_form", [](const CArray& t, int order) {
    const auto b = beta_form(make_finite_operator(to_matrix(t)), order);
    return to_array(b.value.matrix());
  }, py::arg("t"), py::arg("m"));

  m.def("shift_corner", [](const std::string& rule, double param, std::size_t n) {
    WeightRule r;
    if (rule == "dirichlet") r = WeightRule::dirichlet();
    else if (rule == "geometric_concave") r = WeightRule::geometric_concave(param);
    else if (rule == "constant") r = WeightRule::constant(param);
    else throw py::value_error("unknown rule '" + rule + "'");
    return to_array(make_shift_corner(r, n).matrix);
  }, py::arg("rule"), py::arg("param") = 0.5, py::arg("n"));

  m.def("dilate_three_concave", [](const CArray& t, std::size_t n_blocks) {
    const auto model = build_three_concave_model(make_finite_operator(to_matrix(t)));
    const auto d = build_dilation(model, n_blocks);
    return py::make_tuple(to_array(d.w), d.h_dim, d.hprime_dim);
  }, py::arg("t"), py::arg("n_blocks"));

  m.def("run_spec", [](const std::string& text) {
    return render_report(run_pipeline(parse_spec(text)));
  }, py::arg("spec_json"), "Run the pipeline on a JSON spec; returns the JSON report.");
  m.def("classify_spec", [](const std::string& text) {
    return render_report(classify_spec(parse_spec(text)));
  }, py::arg("spec_json"));
  m.def("demo", [](const std::string& name) { return render_report(run_pipeline(demo_spec(name))); },
        py::arg("name"));
  m.def("demo_spec", [](const std::string& name) { return emit_spec(demo_spec(name)); },
        py::arg("name"));
  m.def("demo_names", &demo_names);
}
