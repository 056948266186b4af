// Command-line pipeline for tree-line PCA over populations of binary trees:
// synthesize or ingest datasets, canonicalize raw trees, extract principal
// component tree-lines, and emit score/regression tables for plotting.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "treeline/treeline.hpp"

namespace {

using treeline::BinaryTree;
using treeline::CanonicalDataset;
using treeline::CorrespondenceMode;
using treeline::DatasetFile;
using treeline::Error;
using treeline::NodeIndex;
using treeline::PcResult;
using treeline::RawDataset;
using treeline::TreeDataset;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path);
  if (!in) treeline::fail("io-error", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) treeline::fail("io-error", "cannot open '" + path + "' for writing");
  out << text;
  if (!out) treeline::fail("io-error", "failed writing '" + path + "'");
}

CanonicalDataset load_canonical(const std::string& path) {
  DatasetFile file = treeline::parse_dataset(read_input(path));
  if (!std::holds_alternative<CanonicalDataset>(file)) {
    treeline::fail("invalid-dataset",
                   "'" + path + "' holds raw trees; run the convert command first");
  }
  return std::get<CanonicalDataset>(std::move(file));
}

// --start accepts "intersection", "empty", or a comma-separated index list
BinaryTree resolve_start(const std::string& spec, const TreeDataset& data) {
  if (spec == "intersection") return treeline::intersection(data);
  if (spec == "empty") return BinaryTree();
  std::vector<NodeIndex> indices;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      indices.push_back(v);
    } catch (const std::exception&) {
      treeline::fail("invalid-argument",
                     "--start must be 'intersection', 'empty', or comma-separated indices");
    }
  }
  return BinaryTree::from_indices(std::move(indices));
}

PcResult load_pcs(const std::string& path, std::size_t k_requested) {
  PcResult pcs = treeline::parse_pc_result(read_input(path));
  if (k_requested > 0 && k_requested > pcs.lines.size()) {
    treeline::fail("invalid-argument",
                   "requested k=" + std::to_string(k_requested) + " but the result holds " +
                       std::to_string(pcs.lines.size()) + " components");
  }
  return pcs;
}

int run(int argc, char** argv) {
  CLI::App app{"Tree-line PCA for populations of binary trees"};
  app.require_subcommand(1);
  // let options placed after the subcommand name (notably -o) reach the app
  app.fallthrough();

  std::string output = "-";
  app.add_option("-o,--output", output, "Output file ('-' for stdout)")->capture_default_str();

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic raw dataset");
  treeline::SynthConfig synth_config;
  synth->add_option("--n", synth_config.n, "Number of trees")->capture_default_str();
  synth->add_option("--max-depth", synth_config.max_depth, "Levels in the sampling universe")
      ->capture_default_str();
  synth->add_option("--decay", synth_config.inclusion_decay,
                    "Per-level inclusion probability multiplier in (0,1]")
      ->capture_default_str();
  synth->add_option("--seed", synth_config.seed, "RNG seed")->capture_default_str();
  synth->add_option("--population", synth_config.population, "Population label")
      ->capture_default_str();

  // convert -------------------------------------------------------------
  auto* convert = app.add_subcommand("convert", "Canonicalize a raw dataset");
  std::string convert_input;
  std::string correspondence = "descendant";
  convert->add_option("input", convert_input, "Raw dataset JSON ('-' for stdin)")->required();
  convert->add_option("--correspondence", correspondence,
                      "Child placement rule: descendant or thickness")
      ->capture_default_str();

  // pca -----------------------------------------------------------------
  auto* pca = app.add_subcommand("pca", "Extract principal component tree-lines");
  std::string pca_input;
  std::size_t pca_k = 4;
  std::string start_spec = "intersection";
  std::string table_path;
  pca->add_option("input", pca_input, "Canonical dataset JSON")->required();
  pca->add_option("--k", pca_k, "Components to extract")->capture_default_str();
  pca->add_option("--start", start_spec,
                  "Starting tree: intersection, empty, or index list (e.g. 1,2,5)")
      ->capture_default_str();
  pca->add_option("--table", table_path, "Also write the per-k gains/explained CSV here");

  // scores ----------------------------------------------------------------
  auto* scores = app.add_subcommand("scores", "Score table for the component lines");
  std::string scores_input, scores_pcs;
  std::size_t scores_k = 0;
  scores->add_option("input", scores_input, "Canonical dataset JSON")->required();
  scores->add_option("--pcs", scores_pcs, "PC result JSON from the pca command")->required();
  scores->add_option("--k", scores_k, "Components to include (default: all)");

  // regress ---------------------------------------------------------------
  auto* regress = app.add_subcommand("regress", "Score-versus-covariate regressions");
  std::string regress_input, regress_pcs, covariate = "age";
  std::size_t regress_k = 0;
  regress->add_option("input", regress_input, "Canonical dataset JSON")->required();
  regress->add_option("--pcs", regress_pcs, "PC result JSON from the pca command")->required();
  regress->add_option("--covariate", covariate, "Covariate column")->capture_default_str();
  regress->add_option("--k", regress_k, "Components to test (default: all)");

  // explained ---------------------------------------------------------------
  auto* explained = app.add_subcommand("explained", "Explained-variation table");
  std::string explained_input, explained_pcs;
  explained->add_option("input", explained_input, "Canonical dataset JSON")->required();
  explained->add_option("--pcs", explained_pcs, "PC result JSON from the pca command")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    const RawDataset raw =
        treeline::to_raw_dataset(treeline::synth_population(synth_config),
                                 synth_config.population);
    write_output(output, serialize(raw));
    return 0;
  }

  if (convert->parsed()) {
    const CorrespondenceMode mode = treeline::correspondence_from_name(correspondence);
    DatasetFile file = treeline::parse_dataset(read_input(convert_input));
    if (std::holds_alternative<CanonicalDataset>(file)) {
      // already canonical: the placement rule has nothing left to decide
      write_output(output, serialize(std::get<CanonicalDataset>(file)));
      return 0;
    }
    write_output(output, serialize(treeline::convert_dataset(std::get<RawDataset>(file), mode)));
    return 0;
  }

  if (pca->parsed()) {
    const CanonicalDataset canon = load_canonical(pca_input);
    const TreeDataset data = treeline::to_tree_dataset(canon);
    const BinaryTree start = resolve_start(start_spec, data);
    const PcResult result = treeline::pc_treelines(data, start, pca_k);
    write_output(output, serialize(result));
    if (!table_path.empty()) {
      write_output(table_path, treeline::explained_table_csv(data, result));
    }
    return 0;
  }

  if (scores->parsed()) {
    const TreeDataset data = treeline::to_tree_dataset(load_canonical(scores_input));
    const PcResult pcs = load_pcs(scores_pcs, scores_k);
    const std::size_t k = scores_k == 0 ? pcs.lines.size() : scores_k;
    write_output(output, to_csv(treeline::build_score_table(data, pcs.lines, k)));
    return 0;
  }

  if (regress->parsed()) {
    const TreeDataset data = treeline::to_tree_dataset(load_canonical(regress_input));
    const PcResult pcs = load_pcs(regress_pcs, regress_k);
    const std::size_t k = regress_k == 0 ? pcs.lines.size() : regress_k;
    const auto report = treeline::regress_components(data, pcs.lines, k, covariate);
    std::size_t dropped = 0;
    for (const auto& comp : report) dropped = std::max(dropped, comp.n_dropped);
    if (dropped > 0) {
      std::cerr << "note: dropped " << dropped << " row(s) missing covariate '" << covariate
                << "'\n";
    }
    write_output(output, serialize(report, covariate));
    return 0;
  }

  if (explained->parsed()) {
    const TreeDataset data = treeline::to_tree_dataset(load_canonical(explained_input));
    const PcResult pcs = load_pcs(explained_pcs, 0);
    write_output(output, treeline::explained_table_csv(data, pcs));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    nlohmann::json err;
    err["error"]["code"] = e.code();
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"]["code"] = "internal";
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
