#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "treeline/binary_tree.hpp"
#include "treeline/correspondence.hpp"
#include "treeline/error.hpp"
#include "treeline/pc_solver.hpp"
#include "treeline/stats.hpp"
#include "treeline/synth.hpp"

namespace treeline {

// ---------------------------------------------------------------------------
// Dataset files
//
// A dataset file is UTF-8 JSON with a population label and a list of trees,
// either all raw (attributed node records) or all canonical (strictly
// increasing index lists):
//
//   {"population": "left",
//    "trees": [{"subject_id": "s1", "age": 34, "sex": "F",
//               "nodes": [{"id": "n1", "parent_id": null, "median_radius": 2.5}, ...]}]}
//
//   {"population": "left",
//    "trees": [{"subject_id": "s1", "age": 34, "sex": "F", "indices": [1, 2, 3]}]}
// ---------------------------------------------------------------------------

struct RawRecord {
  SubjectInfo info;
  std::vector<AttributedNode> nodes;
};

struct CanonicalRecord {
  SubjectInfo info;
  BinaryTree tree;
};

struct RawDataset {
  std::string population;
  std::vector<RawRecord> trees;
};

struct CanonicalDataset {
  std::string population;
  std::vector<CanonicalRecord> trees;
};

using DatasetFile = std::variant<RawDataset, CanonicalDataset>;

namespace detail {

using json = nlohmann::json;

inline std::string tree_context(std::size_t ordinal, const std::string& subject_id) {
  std::string out = "trees[" + std::to_string(ordinal) + "]";
  if (!subject_id.empty()) out += " (subject '" + subject_id + "')";
  return out;
}

inline SubjectInfo parse_subject(const json& entry, std::size_t ordinal) {
  SubjectInfo info;
  if (!entry.contains("subject_id") || !entry["subject_id"].is_string()) {
    fail("invalid-dataset", tree_context(ordinal, "") + ": missing string 'subject_id'");
  }
  info.subject_id = entry["subject_id"].get<std::string>();
  if (entry.contains("age") && !entry["age"].is_null()) {
    if (!entry["age"].is_number()) {
      fail("invalid-dataset", tree_context(ordinal, info.subject_id) + ": 'age' must be a number");
    }
    info.age = entry["age"].get<double>();
  }
  if (entry.contains("sex") && !entry["sex"].is_null()) {
    if (!entry["sex"].is_string()) {
      fail("invalid-dataset", tree_context(ordinal, info.subject_id) + ": 'sex' must be a string");
    }
    info.sex = entry["sex"].get<std::string>();
  }
  return info;
}

inline json subject_to_json(const SubjectInfo& info) {
  json j;
  j["subject_id"] = info.subject_id;
  if (info.age.has_value()) j["age"] = *info.age;
  if (!info.sex.empty()) j["sex"] = info.sex;
  return j;
}

}  // namespace detail

inline DatasetFile parse_dataset(const std::string& text) {
  detail::json doc;
  try {
    doc = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    fail("invalid-dataset", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("trees") || !doc["trees"].is_array()) {
    fail("invalid-dataset", "expected an object with a 'trees' array");
  }
  std::string population;
  if (doc.contains("population") && doc["population"].is_string()) {
    population = doc["population"].get<std::string>();
  }
  const auto& trees = doc["trees"];
  if (trees.empty()) fail("invalid-dataset", "'trees' must not be empty");

  const bool canonical = trees.front().is_object() && trees.front().contains("indices");
  std::unordered_set<std::string> seen_ids;
  RawDataset raw{population, {}};
  CanonicalDataset canon{population, {}};
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& entry = trees[i];
    if (!entry.is_object()) {
      fail("invalid-dataset", detail::tree_context(i, "") + ": expected an object");
    }
    SubjectInfo info = detail::parse_subject(entry, i);
    if (!seen_ids.insert(info.subject_id).second) {
      fail("invalid-dataset", detail::tree_context(i, info.subject_id) + ": duplicate subject id");
    }
    if (entry.contains("indices") != canonical || entry.contains("nodes") == canonical) {
      fail("invalid-dataset",
           detail::tree_context(i, info.subject_id) +
               ": every tree must use the same form (all 'indices' or all 'nodes')");
    }
    if (canonical) {
      const auto& arr = entry["indices"];
      if (!arr.is_array()) {
        fail("invalid-dataset",
             detail::tree_context(i, info.subject_id) + ": 'indices' must be an array");
      }
      std::vector<NodeIndex> indices;
      indices.reserve(arr.size());
      for (const auto& v : arr) {
        if (!v.is_number_unsigned()) {
          fail("invalid-dataset", detail::tree_context(i, info.subject_id) +
                                      ": indices must be positive integers");
        }
        indices.push_back(v.get<NodeIndex>());
      }
      for (std::size_t j = 1; j < indices.size(); ++j) {
        if (indices[j] <= indices[j - 1]) {
          fail("invalid-dataset", detail::tree_context(i, info.subject_id) +
                                      ": indices must be strictly increasing at position " +
                                      std::to_string(j));
        }
      }
      const std::string subject_id = info.subject_id;
      try {
        canon.trees.push_back({std::move(info), BinaryTree::from_indices(std::move(indices))});
      } catch (const Error& e) {
        fail("invalid-dataset", detail::tree_context(i, subject_id) + ": " + e.what());
      }
    } else {
      if (!entry.contains("nodes") || !entry["nodes"].is_array()) {
        fail("invalid-dataset",
             detail::tree_context(i, info.subject_id) + ": missing 'nodes' array");
      }
      std::vector<AttributedNode> nodes;
      for (const auto& rec : entry["nodes"]) {
        AttributedNode node;
        if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
            !rec.contains("median_radius") || !rec["median_radius"].is_number()) {
          fail("invalid-dataset",
               detail::tree_context(i, info.subject_id) +
                   ": each node needs a string 'id' and a numeric 'median_radius'");
        }
        node.id = rec["id"].get<std::string>();
        if (rec.contains("parent_id") && !rec["parent_id"].is_null()) {
          if (!rec["parent_id"].is_string()) {
            fail("invalid-dataset", detail::tree_context(i, info.subject_id) +
                                        ": 'parent_id' must be a string or null");
          }
          node.parent_id = rec["parent_id"].get<std::string>();
        }
        node.median_radius = rec["median_radius"].get<double>();
        nodes.push_back(std::move(node));
      }
      raw.trees.push_back({std::move(info), std::move(nodes)});
    }
  }
  if (canonical) return canon;
  return raw;
}

inline DatasetFile load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io-error", "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

inline std::string serialize(const RawDataset& dataset) {
  detail::json j;
  j["population"] = dataset.population;
  j["trees"] = detail::json::array();
  for (const RawRecord& rec : dataset.trees) {
    detail::json entry = detail::subject_to_json(rec.info);
    entry["nodes"] = detail::json::array();
    for (const AttributedNode& node : rec.nodes) {
      detail::json n;
      n["id"] = node.id;
      n["parent_id"] = node.parent_id.has_value() ? detail::json(*node.parent_id)
                                                  : detail::json(nullptr);
      n["median_radius"] = node.median_radius;
      entry["nodes"].push_back(std::move(n));
    }
    j["trees"].push_back(std::move(entry));
  }
  return j.dump(1) + "\n";
}

inline std::string serialize(const CanonicalDataset& dataset) {
  detail::json j;
  j["population"] = dataset.population;
  j["trees"] = detail::json::array();
  for (const CanonicalRecord& rec : dataset.trees) {
    detail::json entry = detail::subject_to_json(rec.info);
    entry["indices"] = rec.tree.indices();
    j["trees"].push_back(std::move(entry));
  }
  return j.dump(1) + "\n";
}

/// Canonicalize a raw dataset by applying one correspondence rule to every
/// tree. Shape errors are reported with the offending tree's position.
inline CanonicalDataset convert_dataset(const RawDataset& raw, CorrespondenceMode mode) {
  CanonicalDataset out;
  out.population = raw.population;
  out.trees.reserve(raw.trees.size());
  for (std::size_t i = 0; i < raw.trees.size(); ++i) {
    const RawRecord& rec = raw.trees[i];
    try {
      AttributedTree tree(rec.nodes);
      out.trees.push_back({rec.info, apply_correspondence(tree, mode)});
    } catch (const Error& e) {
      fail(e.code(), detail::tree_context(i, rec.info.subject_id) + ": " + e.what());
    }
  }
  return out;
}

inline TreeDataset to_tree_dataset(const CanonicalDataset& dataset) {
  std::vector<BinaryTree> trees;
  std::vector<SubjectInfo> info;
  trees.reserve(dataset.trees.size());
  info.reserve(dataset.trees.size());
  for (const CanonicalRecord& rec : dataset.trees) {
    trees.push_back(rec.tree);
    info.push_back(rec.info);
  }
  return TreeDataset(std::move(trees), std::move(info));
}

inline RawDataset to_raw_dataset(const std::vector<SynthSubject>& subjects,
                                 const std::string& population) {
  RawDataset out;
  out.population = population;
  out.trees.reserve(subjects.size());
  for (const SynthSubject& s : subjects) {
    out.trees.push_back({s.info, s.nodes});
  }
  return out;
}

// ---------------------------------------------------------------------------
// PC results
// ---------------------------------------------------------------------------

inline std::string serialize(const PcResult& result) {
  detail::json j;
  j["start"] = result.start.indices();
  j["lines"] = detail::json::array();
  for (std::size_t k = 0; k < result.lines.size(); ++k) {
    detail::json line;
    line["path"] = result.lines[k].path();
    line["gain"] = result.gains[k];
    j["lines"].push_back(std::move(line));
  }
  j["exhausted_at"] = result.exhausted_at.has_value()
                          ? detail::json(*result.exhausted_at)
                          : detail::json(nullptr);
  return j.dump(1) + "\n";
}

inline PcResult parse_pc_result(const std::string& text) {
  detail::json doc;
  try {
    doc = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    fail("invalid-pc-result", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("start") || !doc.contains("lines") ||
      !doc["start"].is_array() || !doc["lines"].is_array()) {
    fail("invalid-pc-result", "expected an object with 'start' and 'lines'");
  }
  PcResult result;
  try {
    result.start = BinaryTree::from_indices(doc["start"].get<std::vector<NodeIndex>>());
    for (const auto& line : doc["lines"]) {
      if (!line.is_object() || !line.contains("path") || !line["path"].is_array()) {
        fail("invalid-pc-result", "each line needs a 'path' array");
      }
      result.lines.emplace_back(result.start, line["path"].get<std::vector<NodeIndex>>());
      result.gains.push_back(line.contains("gain") ? line["gain"].get<std::uint64_t>() : 0);
    }
  } catch (const Error& e) {
    fail("invalid-pc-result", e.what());
  } catch (const detail::json::exception& e) {
    fail("invalid-pc-result", e.what());
  }
  if (doc.contains("exhausted_at") && !doc["exhausted_at"].is_null()) {
    result.exhausted_at = doc["exhausted_at"].get<std::size_t>();
  }
  return result;
}

inline PcResult load_pc_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io-error", "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pc_result(buf.str());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV emitters (RFC 4180: quoted fields where needed, CRLF row endings)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string to_csv(const ScoreTable& table) {
  std::string out = "subject_id,age,sex";
  for (std::size_t k = 1; k <= table.components; ++k) out += ",pc" + std::to_string(k);
  for (std::size_t k = 1; k <= table.components; ++k) out += ",cum" + std::to_string(k);
  out += "\r\n";
  for (const ScoreRow& row : table.rows) {
    out += detail::csv_field(row.subject_id);
    out += ',';
    if (row.age.has_value()) out += detail::format_number(*row.age);
    out += ',';
    out += detail::csv_field(row.sex);
    for (std::uint64_t s : row.pc_scores) out += ',' + std::to_string(s);
    for (std::uint64_t s : row.cumulative_scores) out += ',' + std::to_string(s);
    out += "\r\n";
  }
  return out;
}

/// Per-component gains and explained variation (union-projection node
/// totals, starting-tree nodes included).
inline std::string explained_table_csv(const TreeDataset& data, const PcResult& result) {
  std::string out = "k,gain,explained_nodes\r\n";
  for (std::size_t k = 1; k <= result.lines.size(); ++k) {
    out += std::to_string(k);
    out += ',' + std::to_string(result.gains[k - 1]);
    out += ',' + std::to_string(explained_variation(data, result.lines, k));
    out += "\r\n";
  }
  return out;
}

inline std::string serialize(const std::vector<ComponentRegression>& report,
                             const std::string& covariate) {
  detail::json j;
  j["covariate"] = covariate;
  j["components"] = detail::json::array();
  for (const ComponentRegression& comp : report) {
    detail::json c;
    c["label"] = comp.label;
    c["kind"] = comp.cumulative ? "cumulative" : "individual";
    c["k"] = comp.k;
    c["slope"] = comp.fit.slope;
    c["intercept"] = comp.fit.intercept;
    if (std::isfinite(comp.fit.t_stat)) {
      c["t_stat"] = comp.fit.t_stat;
    } else {
      c["t_stat"] = comp.fit.t_stat > 0 ? "inf" : "-inf";
    }
    c["df"] = comp.fit.df;
    c["p_value"] = comp.fit.p_value;
    c["exact_fit"] = comp.fit.exact_fit;
    c["n_used"] = comp.n_used;
    c["n_dropped"] = comp.n_dropped;
    j["components"].push_back(std::move(c));
  }
  return j.dump(1) + "\n";
}

}  // namespace treeline
