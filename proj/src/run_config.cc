#include "cwp/run_config.h"

#include <initializer_list>
#include <string_view>

#include "cwp/error.h"
#include "cwp/io.h"

namespace cwp::cli {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw UsageError("config: '" + std::string(where) + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) {
      throw UsageError("config: unknown key '" + key + "' in '" + std::string(where) + "'");
    }
  }
}

template <typename T>
void read(const json& obj, std::string_view where, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: '" + std::string(where) + "." + key + "' has the wrong type");
  }
}

template <typename T>
void read_positive(const json& obj, std::string_view where, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer() || it->template get<long long>() < 1) {
    throw UsageError("config: '" + std::string(where) + "." + key +
                     "' must be a positive integer");
  }
  out = static_cast<T>(it->template get<long long>());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) throw UsageError("config: empty path");
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void read_path(const json& obj, std::string_view where, const char* key, const fs::path& base,
               std::optional<fs::path>& out) {
  std::string s;
  if (!obj.contains(key)) return;
  read(obj, where, key, s);
  out = resolve(base, s);
}

std::string path_str(const std::optional<fs::path>& p) {
  return p ? p->generic_string() : std::string();
}

}  // namespace

const fs::path& RunConfig::partition_path(const std::string& name) const {
  const auto it = partitions.find(name);
  if (it == partitions.end()) {
    throw UsageError("no path configured for partition '" + name + "'");
  }
  return it->second;
}

fs::path RunConfig::catalog_path() const {
  return verb_catalog ? *verb_catalog : out_dir / "verb_catalog.tsv";
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  RunConfig c;
  check_keys(doc, "config", {"seed", "out", "embedding_provenance", "paths", "schema", "llm",
                             "prune", "eval"});
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw UsageError("config: 'seed' must be a non-negative integer");
    }
    if (doc["seed"].is_number_integer() && doc["seed"].get<long long>() < 0) {
      throw UsageError("config: 'seed' must be a non-negative integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("out")) {
    std::string out;
    read(doc, "config", "out", out);
    c.out_dir = resolve(base_dir, out);
  }
  if (doc.contains("embedding_provenance")) {
    read(doc, "config", "embedding_provenance", c.embedding_provenance);
  }

  if (doc.contains("paths")) {
    const json& p = doc["paths"];
    check_keys(p, "paths", {"partitions", "annotations", "embeddings", "embedding_ids",
                            "verb_catalog", "verb_overrides"});
    if (p.contains("partitions")) {
      if (!p["partitions"].is_object()) {
        throw UsageError("config: 'paths.partitions' must be an object");
      }
      for (const auto& [name, value] : p["partitions"].items()) {
        if (!value.is_string()) {
          throw UsageError("config: 'paths.partitions." + name + "' must be a string");
        }
        c.partitions[name] = resolve(base_dir, value.get<std::string>());
      }
    }
    read_path(p, "paths", "annotations", base_dir, c.annotations);
    read_path(p, "paths", "embeddings", base_dir, c.embeddings);
    read_path(p, "paths", "embedding_ids", base_dir, c.embedding_ids);
    read_path(p, "paths", "verb_catalog", base_dir, c.verb_catalog);
    read_path(p, "paths", "verb_overrides", base_dir, c.verb_overrides);
  }

  if (doc.contains("schema")) {
    const json& s = doc["schema"];
    check_keys(s, "schema", {"id_column", "text_column", "label_column",
                             "case_insensitive_labels"});
    read(s, "schema", "id_column", c.schema.id_column);
    read(s, "schema", "text_column", c.schema.text_column);
    read(s, "schema", "label_column", c.schema.label_column);
    read(s, "schema", "case_insensitive_labels", c.schema.case_insensitive_labels);
  }

  if (doc.contains("llm")) {
    const json& l = doc["llm"];
    check_keys(l, "llm", {"base_url", "model", "temperature", "max_tokens", "in_flight",
                          "retry", "api_key_file"});
    read(l, "llm", "base_url", c.llm.base_url);
    read(l, "llm", "model", c.llm.model);
    read(l, "llm", "temperature", c.llm.temperature);
    read_positive(l, "llm", "max_tokens", c.llm.max_tokens);
    read_positive(l, "llm", "in_flight", c.llm.in_flight);
    read_path(l, "llm", "api_key_file", base_dir, c.llm.api_key_file);
    if (c.llm.temperature < 0.0) throw UsageError("config: 'llm.temperature' must be >= 0");
    if (l.contains("retry")) {
      const json& r = l["retry"];
      check_keys(r, "llm.retry",
                 {"max_attempts", "initial_backoff_ms", "multiplier", "max_backoff_ms"});
      read_positive(r, "llm.retry", "max_attempts", c.llm.retry.max_attempts);
      long long initial = c.llm.retry.initial_backoff.count();
      long long max = c.llm.retry.max_backoff.count();
      read(r, "llm.retry", "initial_backoff_ms", initial);
      read(r, "llm.retry", "max_backoff_ms", max);
      read(r, "llm.retry", "multiplier", c.llm.retry.multiplier);
      if (initial < 0 || max < 0 || c.llm.retry.multiplier < 1.0) {
        throw UsageError("config: retry backoffs must be >= 0 and multiplier >= 1");
      }
      c.llm.retry.initial_backoff = std::chrono::milliseconds(initial);
      c.llm.retry.max_backoff = std::chrono::milliseconds(max);
    }
  }

  if (doc.contains("prune")) {
    const json& p = doc["prune"];
    check_keys(p, "prune", {"min_length", "criteria", "max_passes", "embed_dim"});
    read_positive(p, "prune", "min_length", c.prune.min_length);
    read_positive(p, "prune", "max_passes", c.prune.cnn_max_passes);
    read_positive(p, "prune", "embed_dim", c.embed_dim);
    if (p.contains("criteria")) {
      std::vector<std::string> names;
      read(p, "prune", "criteria", names);
      c.prune.criteria_enabled = {};
      for (const std::string& name : names) {
        bool found = false;
        for (prune::Criterion crit : prune::kAllCriteria) {
          if (prune::criterion_name(crit) == name) {
            c.prune.criteria_enabled.add(crit);
            found = true;
          }
        }
        if (!found) throw UsageError("config: unknown prune criterion '" + name + "'");
      }
    }
  }

  if (doc.contains("eval")) {
    const json& e = doc["eval"];
    check_keys(e, "eval", {"k"});
    read_positive(e, "eval", "k", c.eval_k);
  }
  c.prune.cnn_seed = c.seed;
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  const std::string bytes = io::read_file(path);
  const json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded()) throw UsageError("config " + path.string() + " is not valid JSON");
  return parse_run_config(doc, path.parent_path());
}

json to_json(const RunConfig& c) {
  json partitions = json::object();
  for (const auto& [name, p] : c.partitions) partitions[name] = p.generic_string();
  std::vector<std::string> criteria;
  for (prune::Criterion crit : prune::kAllCriteria) {
    if (c.prune.criteria_enabled.has(crit)) criteria.emplace_back(prune::criterion_name(crit));
  }
  return {
      {"seed", c.seed},
      {"embedding_provenance",
       !c.embedding_provenance.empty() ? c.embedding_provenance
       : c.embeddings ? "unspecified"
                      : "builtin hashed bag-of-words, dim " + std::to_string(c.embed_dim)},
      {"paths",
       {{"partitions", partitions},
        {"annotations", path_str(c.annotations)},
        {"embeddings", path_str(c.embeddings)},
        {"embedding_ids", path_str(c.embedding_ids)},
        {"verb_catalog", path_str(c.verb_catalog)},
        {"verb_overrides", path_str(c.verb_overrides)}}},
      {"schema",
       {{"id_column", c.schema.id_column},
        {"text_column", c.schema.text_column},
        {"label_column", c.schema.label_column},
        {"case_insensitive_labels", c.schema.case_insensitive_labels}}},
      {"llm",
       {{"model", c.llm.model},
        {"temperature", c.llm.temperature},
        {"max_tokens", c.llm.max_tokens},
        {"in_flight", c.llm.in_flight},
        {"retry",
         {{"max_attempts", c.llm.retry.max_attempts},
          {"initial_backoff_ms", c.llm.retry.initial_backoff.count()},
          {"multiplier", c.llm.retry.multiplier},
          {"max_backoff_ms", c.llm.retry.max_backoff.count()}}}}},
      {"prune",
       {{"min_length", c.prune.min_length},
        {"criteria", criteria},
        {"max_passes", c.prune.cnn_max_passes},
        {"embed_dim", c.embed_dim}}},
      {"eval", {{"k", c.eval_k}}},
  };
}

void check_inputs_exist(const RunConfig& c) {
  auto require = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) {
      throw UsageError(std::string(what) + " not found: " + p->string());
    }
  };
  for (const auto& [name, p] : c.partitions) {
    if (!fs::exists(p)) throw UsageError("partition '" + name + "' not found: " + p.string());
  }
  require(c.annotations, "annotation file");
  require(c.embeddings, "embedding matrix");
  require(c.embedding_ids, "embedding ids");
  require(c.verb_overrides, "verb override file");
  require(c.llm.api_key_file, "api key file");
  if (c.embeddings.has_value() != c.embedding_ids.has_value()) {
    throw UsageError("paths.embeddings and paths.embedding_ids must be given together");
  }
}

}  // namespace cwp::cli
