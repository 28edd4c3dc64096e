#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdilate/pipeline.hpp"

namespace {

using namespace mdilate;

int emit(const PipelineResult& result, const std::string& out) {
  const std::string text = render_report(result, {report_timestamp()});
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return 1;
    }
    f << text;
  }
  if (result.error) std::cerr << "error: " << result.error->message << "\n";
  for (const auto& c : result.report.checks)
    if (!c.passed) std::cerr << "check failed: " << c.name << " residual " << c.residual << "\n";
  return exit_code(result);
}

void apply_overrides(OperatorSpecFile& spec, const std::vector<std::string>& tols,
                     std::optional<std::uint64_t> seed) {
  for (const auto& item : tols) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::validation_error, "--tol expects NAME=VALUE, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::validation_error, "--tol value for '" + name + "' is not a number");
    }
    if (!(value > 0.0) || !Tolerances{}.set(name, value))
      throw Error(ErrorCode::validation_error, "invalid tolerance override '" + item + "'");
    spec.tolerances[name] = value;
  }
  if (seed) spec.seed = *seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct and verify m-isometric dilations of m-concave operators"};
  app.require_subcommand(0, 1);
  bool list_demos = false;
  app.add_flag("--list-demos", list_demos, "List the built-in demo names");

  std::string spec_path, out_path;
  std::vector<std::string> tols;
  std::optional<std::uint64_t> seed;
  auto* dilate = app.add_subcommand("dilate", "Run the full pipeline on a spec file");
  dilate->add_option("--spec", spec_path, "Operator spec (JSON)")->required();
  dilate->add_option("--out", out_path, "Write the report here instead of stdout");
  dilate->add_option("--seed", seed, "Seed for the random test vectors");
  dilate->add_option("--tol", tols, "Tolerance override NAME=VALUE")->take_all();

  std::string verify_spec;
  auto* verify = app.add_subcommand("verify", "Classify the operator of a spec file");
  verify->add_option("--spec", verify_spec, "Operator spec (JSON)")->required();

  std::string demo_name, demo_out;
  auto* demo = app.add_subcommand("demo", "Run a built-in demo");
  demo->add_option("name", demo_name, "Demo name")->required();
  demo->add_option("--out", demo_out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    if (list_demos) {
      for (const auto& n : demo_names()) std::cout << n << "\n";
      return 0;
    }
    if (*dilate) {
      auto spec = load_spec(spec_path);
      apply_overrides(spec, tols, seed);
      return emit(run_pipeline(spec), out_path);
    }
    if (*verify) return emit(classify_spec(load_spec(verify_spec)), "");
    if (*demo) return emit(run_pipeline(demo_spec(demo_name)), demo_out);
    std::cout << app.help();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::parse_error:
      case ErrorCode::validation_error: return 3;
      case ErrorCode::precondition_failed: return 2;
      default: return 1;
    }
  }
}
