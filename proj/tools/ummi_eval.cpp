#include <iostream>

#include "CLI11.hpp"
#include "ummi/cli.hpp"

namespace {

void input_flags(CLI::App* app, ummi::cli::RunConfig& c) {
  app->add_option("--dataset", c.dataset, "Shipped config name (3dshapes, synaction, celeba_d)");
  app->add_option("--config-dir", c.config_dir, "Directory holding shipped .schema/.partition files");
  app->add_option("--schema", c.schema, "Attribute schema file");
  app->add_option("--partition", c.partition, "Partition config file");
}

void report_flags(CLI::App* app, ummi::cli::RunConfig& c) {
  app->add_option("--format", c.formats, "Report formats: markdown, csv, json")->delimiter(',');
  app->add_option("--precision", c.precision, "Decimals in markdown tables");
  app->add_option("--gray-open", c.gray_open, "Marker opening a low-confidence cell");
  app->add_option("--gray-close", c.gray_close, "Marker closing a low-confidence cell");
}

}  // namespace

int main(int argc, char** argv) {
  ummi::cli::RunConfig c;
  CLI::App app{"Build two-domain splits, simulate baseline translators and score translation triplets."};
  app.set_config("--config", "", "INI/TOML file supplying any flag");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", c.out, "Output directory")->envname("UMMI_OUT_DIR");
  app.add_option("--seed", c.seed, "Random seed");

  auto* split = app.add_subcommand("split", "Filter a corpus into domain manifests");
  input_flags(split, c);
  split->add_option("--corpus", c.corpus, "Corpus file, or builtin:3dshapes");
  split->add_option("--corpus-format", c.corpus_format, "csv, jsonl or celeba-attr (default: from extension)");

  auto* simulate = app.add_subcommand("simulate", "Generate triplets from a baseline oracle");
  input_flags(simulate, c);
  simulate->add_option("--manifest-a", c.manifest_a, "Domain A manifest (default: <out>/A.jsonl)");
  simulate->add_option("--manifest-b", c.manifest_b, "Domain B manifest (default: <out>/B.jsonl)");
  simulate->add_option("--triplets", c.triplets, "Output triplet file (default: <out>/triplets.jsonl)");
  simulate->add_option("--oracle", c.oracle,
                       "content-identity, guidance-identity, random-target, random-triplets, style-copier, constant");
  simulate->add_option("--epsilon", c.epsilon, "Per-attribute noise rate");
  simulate->add_option("--copy", c.copy, "Attributes a style-copier takes from the guidance")->delimiter(',');
  simulate->add_option("--constant", c.constant, "JSON array for the constant oracle");
  simulate->add_option("--pairs", c.pairs, "Pairs per direction (cap for exhaustive pairing)");
  simulate->add_option("--pairing", c.pairing, "uniform or exhaustive");
  simulate->add_option("--distribution-mode", c.distribution_mode, "joint or marginals");

  auto* eval = app.add_subcommand("eval", "Score a triplet file");
  input_flags(eval, c);
  report_flags(eval, c);
  eval->add_option("--triplets", c.triplets, "Triplet file (.jsonl or .csv)");
  eval->add_option("--bias-threshold", c.bias_threshold, "B above this marks a row low-confidence");
  eval->add_option("--labels", c.labels, "as-given or ground-truth");
  eval->add_option("--name", c.name, "Row name in the report");
  eval->add_flag("--per-attribute", c.per_attribute, "Also write per-attribute tables");
  eval->add_option("--pose-attribute", c.pose_attribute, "Continuous yaw/pitch/roll attribute for the pose table");
  eval->add_option("--workers", c.workers, "Evaluation threads");

  auto* report = app.add_subcommand("report", "Merge JSON reports into one table");
  report_flags(report, c);
  report->add_option("reports", c.reports, "JSON reports to merge")->required();

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the built-in consistency checks");
  selfcheck->add_option("--config-dir", c.config_dir, "Directory holding shipped .schema/.partition files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ummi::ExitCode::ConfigError);
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  return ummi::cli::run(c, std::cout, std::cerr);
}
