#include "adbn/model/domain_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "adbn/error.hpp"
#include "json.hpp"

namespace adbn::model {

using nlohmann::json;

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::initializer_list<std::string_view> required, const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::SchemaError, where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto k : allowed) known = known || it.key() == k;
    if (!known) throw Error(Errc::SchemaError, where + ": unknown key '" + it.key() + "'");
  }
  for (auto k : required) {
    if (!obj.contains(std::string(k))) {
      throw Error(Errc::SchemaError, where + ": missing key '" + std::string(k) + "'");
    }
  }
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(Errc::SchemaError, where + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw Error(Errc::SchemaError, where + ": expected strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(Errc::SchemaError, where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw Error(Errc::SchemaError, where + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

// Key of a parent configuration: the parents' state labels joined by ','.
std::string config_key(const std::vector<const std::vector<std::string>*>& labels,
                       const std::vector<std::size_t>& values) {
  std::string key;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) key += ',';
    key += (*labels[i])[values[i]];
  }
  return key;
}

// Reads a {config-key: row-list} object covering every configuration.
std::vector<std::vector<double>> read_config_table(
    const json& obj, const std::vector<const std::vector<std::string>*>& parent_labels,
    const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::SchemaError, where + ": expected an object");
  std::vector<std::size_t> cards;
  for (const auto* l : parent_labels) cards.push_back(l->size());
  const std::size_t configs = config_count(cards);
  std::vector<std::vector<double>> rows(configs);
  std::set<std::string> seen;
  for (std::size_t c = 0; c < configs; ++c) {
    const std::string key = config_key(parent_labels, unflatten(cards, c));
    if (!obj.contains(key)) {
      throw Error(Errc::SchemaError, where + ": missing entry for configuration '" + key + "'");
    }
    rows[c] = number_list(obj.at(key), where + "[" + key + "]");
    seen.insert(key);
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!seen.count(it.key())) {
      throw Error(Errc::SchemaError, where + ": unknown configuration '" + it.key() + "'");
    }
  }
  return rows;
}

std::vector<std::size_t> resolve_parents(const json& names, const CtbnSpec& spec,
                                         const std::string& where) {
  std::vector<std::size_t> out;
  for (const auto& n : string_list(names, where)) {
    auto idx = spec.find(n);
    if (!idx) throw Error(Errc::SchemaError, where + ": unknown parent '" + n + "'");
    out.push_back(*idx);
  }
  return out;
}

Domain parse(const json& doc) {
  require_keys(doc, {"variables", "parents", "cims", "observations"}, {"variables", "cims"},
               "domain");
  Domain d;
  CtbnSpec& spec = d.spec;

  if (!doc.at("variables").is_array()) throw Error(Errc::SchemaError, "variables: expected array");
  for (const auto& v : doc.at("variables")) {
    require_keys(v, {"name", "states", "initial"}, {"name", "states", "initial"}, "variable");
    if (!v.at("name").is_string()) throw Error(Errc::SchemaError, "variable name must be a string");
    VariableSpec var;
    var.name = v.at("name").get<std::string>();
    var.states = string_list(v.at("states"), var.name + ".states");
    var.initial = number_list(v.at("initial"), var.name + ".initial");
    spec.variables.push_back(std::move(var));
  }
  spec.parents.assign(spec.size(), {});
  if (doc.contains("parents")) {
    const auto& parents = doc.at("parents");
    if (!parents.is_object()) throw Error(Errc::SchemaError, "parents: expected an object");
    for (auto it = parents.begin(); it != parents.end(); ++it) {
      const std::size_t v = spec.index_of(it.key());
      spec.parents[v] = resolve_parents(it.value(), spec, "parents." + it.key());
    }
  }

  const auto& cims = doc.at("cims");
  if (!cims.is_object()) throw Error(Errc::SchemaError, "cims: expected an object");
  for (auto it = cims.begin(); it != cims.end(); ++it) spec.index_of(it.key());
  spec.cims.resize(spec.size());
  for (std::size_t v = 0; v < spec.size(); ++v) {
    const auto& name = spec.variables[v].name;
    if (!cims.contains(name)) throw Error(Errc::SchemaError, "cims: missing variable '" + name + "'");
    std::vector<const std::vector<std::string>*> labels;
    for (std::size_t p : spec.parents[v]) labels.push_back(&spec.variables[p].states);
    const std::size_t n = spec.cardinality(v);
    for (auto& rates : read_config_table(cims.at(name), labels, "cims." + name)) {
      if (rates.size() != n * n) {
        throw Error(Errc::ValidationError, "cims." + name + ": expected " +
                                               std::to_string(n * n) + " rates");
      }
      linalg::Matrix m(n, n);
      for (std::size_t i = 0; i < n * n; ++i) m(i / n, i % n) = rates[i];
      try {
        spec.cims[v].push_back(linalg::validate_intensity(std::move(m)));
      } catch (const Error& e) {
        throw Error(Errc::ValidationError, "cims." + name + ": " + e.what());
      }
    }
  }
  spec.validate();

  if (doc.contains("observations")) {
    const auto& obs = doc.at("observations");
    if (!obs.is_array()) throw Error(Errc::SchemaError, "observations: expected an array");
    for (const auto& o : obs) {
      require_keys(o, {"name", "states", "parents", "cpt"}, {"name", "states", "parents", "cpt"},
                   "observation");
      Sensor s;
      s.name = o.at("name").get<std::string>();
      s.states = string_list(o.at("states"), s.name + ".states");
      s.parents = resolve_parents(o.at("parents"), spec, s.name + ".parents");
      std::vector<const std::vector<std::string>*> labels;
      std::vector<std::size_t> cards;
      for (std::size_t p : s.parents) {
        labels.push_back(&spec.variables[p].states);
        cards.push_back(spec.cardinality(p));
      }
      std::vector<double> table;
      for (auto& row : read_config_table(o.at("cpt"), labels, s.name + ".cpt")) {
        if (row.size() != s.states.size()) {
          throw Error(Errc::ValidationError, s.name + ".cpt: row length mismatch");
        }
        table.insert(table.end(), row.begin(), row.end());
      }
      s.cpt = Cpt(s.states.size(), std::move(cards), std::move(table));
      d.observations.sensors.push_back(std::move(s));
    }
  }
  d.observations.validate(spec);
  return d;
}

}  // namespace

Domain load_domain(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  try {
    return parse(doc);
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, e.what());
  }
}

Domain load_domain_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_domain(buf.str());
}

std::string save_domain(const Domain& domain) {
  const CtbnSpec& spec = domain.spec;
  json doc;
  doc["variables"] = json::array();
  for (const auto& v : spec.variables) {
    doc["variables"].push_back({{"name", v.name}, {"states", v.states}, {"initial", v.initial}});
  }
  doc["parents"] = json::object();
  doc["cims"] = json::object();
  for (std::size_t v = 0; v < spec.size(); ++v) {
    const auto& name = spec.variables[v].name;
    std::vector<const std::vector<std::string>*> labels;
    json parent_names = json::array();
    for (std::size_t p : spec.parents[v]) {
      labels.push_back(&spec.variables[p].states);
      parent_names.push_back(spec.variables[p].name);
    }
    if (!spec.parents[v].empty()) doc["parents"][name] = parent_names;
    const auto cards = spec.parent_cards(v);
    json table = json::object();
    for (std::size_t c = 0; c < spec.cims[v].size(); ++c) {
      auto data = spec.cims[v][c].matrix().data();
      table[config_key(labels, unflatten(cards, c))] = std::vector<double>(data.begin(), data.end());
    }
    doc["cims"][name] = table;
  }
  doc["observations"] = json::array();
  for (const auto& s : domain.observations.sensors) {
    std::vector<const std::vector<std::string>*> labels;
    json parent_names = json::array();
    for (std::size_t p : s.parents) {
      labels.push_back(&spec.variables[p].states);
      parent_names.push_back(spec.variables[p].name);
    }
    json table = json::object();
    for (std::size_t r = 0; r < s.cpt.num_rows(); ++r) {
      auto row = s.cpt.row(r);
      table[config_key(labels, unflatten(s.cpt.parent_cards(), r))] =
          std::vector<double>(row.begin(), row.end());
    }
    doc["observations"].push_back(
        {{"name", s.name}, {"states", s.states}, {"parents", parent_names}, {"cpt", table}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace adbn::model
