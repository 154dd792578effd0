// Batch pipeline: ingest or synthesize, apply actions, write artifacts.
#include <iostream>

#include <CLI11.hpp>

#include "evseq/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"evseq: event-sequence analysis pipeline"};
  evseq::PipelineOptions options;
  std::string config, out = ".";
  std::uint64_t seed = 0;
  app.add_option("--config", config, "Pipeline config (JSON)")->required();
  app.add_option("--out", out, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Override the synthetic generator seed");
  app.add_flag("--verbose", options.verbose, "Log action parameters");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? evseq::kExitOk : evseq::kExitValidation;
  }
  options.config_path = config;
  options.out_dir = out;
  if (*seed_opt) options.seed = seed;
  return evseq::run_pipeline(options, std::cerr);
}
