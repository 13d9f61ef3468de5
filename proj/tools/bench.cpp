// SPDX-License-Identifier: Apache-2.0
// bench: transaction-creation latency against cameras per gateway.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tool_common.hpp"
#include "vidledger/bench.hpp"

using namespace vidledger;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transaction latency benchmark"};
  app.require_subcommand(1);

  std::string plan_path, out, in, svg;
  std::uint32_t baseline = 1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a plan and write the result CSV");
  run->add_option("--plan", plan_path, "Plan JSON; defaults apply when omitted");
  run->add_option("--out", out, "Result CSV")->required();
  run->add_option("--svg", svg, "Also write the latency chart here");
  run->add_option("--baseline", baseline, "Camera count the summary ratios are taken against");
  run->add_flag("--quiet", quiet);

  auto* plot = app.add_subcommand("plot", "Render a result CSV as an SVG chart");
  plot->add_option("--in", in, "Result CSV")->required();
  plot->add_option("--out", svg, "SVG file")->required();

  auto* summary = app.add_subcommand("summarize", "Print latency ratios against a baseline count");
  summary->add_option("--in", in, "Result CSV")->required();
  summary->add_option("--baseline", baseline);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  try {
    if (*run) {
      const auto plan = plan_path.empty() ? bench::ExperimentPlan{} : bench::parse_plan_json(slurp(plan_path));
      plan.validate();
      bench::Progress progress;
      if (!quiet) progress = [](const std::string& line) { std::cerr << line << '\n'; };
      const auto result = bench::run_experiment(plan, progress);
      write_file(out, bench::result_csv(result));
      if (!svg.empty()) write_file(svg, bench::plot_svg(result));
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      try {
        std::cout << bench::render_summary(bench::summarize(result, baseline), baseline);
      } catch (const std::invalid_argument& e) {
        std::cerr << "no summary: " << e.what() << '\n';
      }
      return result.dirty ? 1 : 0;
    }
    const auto result = bench::parse_result_csv(slurp(in));
    if (*plot) {
      write_file(svg, bench::plot_svg(result));
      return 0;
    }
    std::cout << bench::render_summary(bench::summarize(result, baseline), baseline);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  }
}
