#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgs/io/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mgs: manifold-guided diffusion sampling at desk scale"};
  app.require_subcommand(1);

  mgs::io::CommandOptions opts;
  std::string config, out;
  std::uint64_t seed = 0;
  std::string generated, real;
  std::vector<std::string> reports;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "flat key = value config file");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out, "output root (default: runs)");
    return sub;
  };

  common(app.add_subcommand("make-data", "synthesize or import the training set"));
  common(app.add_subcommand("train-diffusion", "train the noise model"));
  common(app.add_subcommand("train-manifold", "train the embedder F and relation net g"));
  auto* sample = common(app.add_subcommand("sample", "generate eval.samples samples"));
  sample->add_flag("--guided", opts.guided, "apply manifold guidance");
  sample->add_flag("--trace", opts.trace, "write per-step guidance objective and gradient norms");
  auto* evaluate = common(app.add_subcommand("evaluate", "compare unguided and guided samples to a balanced reference"));
  evaluate->add_option("--generated", generated, "evaluate this sample CSV instead");
  evaluate->add_option("--real", real, "reference CSV to compare against");
  auto* ablate = common(app.add_subcommand("ablate", "sweep one setting and write a CSV table"));
  ablate->add_option("--axis", opts.axis, "lambda | guidance_steps | batch_size | relation_source | sampler_steps")
      ->required();
  ablate->add_option("--values", opts.values, "comma-separated values")->required();
  auto* plot = common(app.add_subcommand("plot", "render histogram / proportion reports to SVG"));
  plot->add_option("reports", reports, "report CSVs (default: the run's own reports)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: code=" << mgs::io::kExitConfig << " kind=config message=\"" << e.what() << "\"\n";
    return mgs::io::kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  opts.config = config;
  if (sub->count("--seed")) opts.seed = seed;
  if (!out.empty()) opts.out = out;
  if (!generated.empty()) opts.generated = generated;
  if (!real.empty()) opts.real = real;
  for (const auto& r : reports) opts.reports.emplace_back(r);
  return mgs::io::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
