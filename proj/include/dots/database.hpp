#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dots/common.hpp"
#include "dots/ontology.hpp"
#include "dots/state.hpp"

namespace dots {

struct EntityRecord {
  int domain = -1;
  std::string id;
  std::map<std::string, std::string> attributes;  // informable slot -> value
  std::map<std::string, std::string> extras;      // requestable slot -> value

  const std::string* lookup(const std::string& slot) const {
    if (auto it = attributes.find(slot); it != attributes.end()) return &it->second;
    if (auto it = extras.find(slot); it != extras.end()) return &it->second;
    return nullptr;
  }
};

// lowercase, trim, then one canonical-synonym lookup
inline std::string normalize(const std::string& value,
                             const std::map<std::string, std::string>& synonyms) {
  std::string v = to_lower(trim(value));
  auto it = synonyms.find(v);
  return it == synonyms.end() ? v : it->second;
}

class Database {
 public:
  Database() = default;

  Database(const Ontology& ont, std::vector<EntityRecord> entities,
           std::map<std::string, std::string> synonyms = {})
      : synonyms_(std::move(synonyms)) {
    per_domain_.resize(ont.n_domains());
    for (auto& e : entities) {
      if (e.domain < 0 || e.domain >= ont.n_domains())
        throw ConfigError("entity '" + e.id + "' has unknown domain index");
      const auto& dom = ont.domain(e.domain);
      for (const auto& slot : dom.informable) {
        auto it = e.attributes.find(slot.name);
        if (it == e.attributes.end())
          throw ConfigError("entity '" + e.id + "' in domain " + dom.name +
                            " is missing informable slot '" + slot.name + "'");
        bool legal = false;
        for (const auto& cand : slot.values)
          if (normalize(cand, synonyms_) == normalize(it->second, synonyms_)) legal = true;
        if (!legal)
          throw ConfigError("entity '" + e.id + "' has illegal value '" + it->second +
                            "' for slot " + dom.name + "-" + slot.name);
      }
      per_domain_[e.domain].push_back(std::move(e));
    }
    for (auto& list : per_domain_) {
      std::sort(list.begin(), list.end(),
                [](const EntityRecord& a, const EntityRecord& b) { return a.id < b.id; });
      for (std::size_t i = 1; i < list.size(); ++i)
        if (list[i].id == list[i - 1].id)
          throw ConfigError("duplicate entity id '" + list[i].id + "' within a domain");
    }
  }

  const std::vector<EntityRecord>& entities(int domain) const { return per_domain_.at(domain); }
  const std::map<std::string, std::string>& synonyms() const { return synonyms_; }

  std::string normalized(const std::string& v) const { return normalize(v, synonyms_); }

  bool matches(const EntityRecord& e, const Ontology& ont, const BeliefState& b) const {
    const auto& dom = ont.domain(e.domain);
    for (std::size_t s = 0; s < dom.informable.size(); ++s) {
      const std::string& want = b.value(ont, e.domain, static_cast<int>(s));
      if (want.empty() || want == kDontcare) continue;  // unconstrained
      auto it = e.attributes.find(dom.informable[s].name);
      if (it == e.attributes.end()) return false;
      if (normalized(it->second) != normalized(want)) return false;
    }
    return true;
  }

  int match_count(const Ontology& ont, int domain, const BeliefState& b) const {
    int n = 0;
    for (const auto& e : per_domain_.at(domain))
      if (matches(e, ont, b)) ++n;
    return n;
  }

 private:
  std::vector<std::vector<EntityRecord>> per_domain_;  // each sorted by id
  std::map<std::string, std::string> synonyms_;
};

// DB_t = bucketed match counts for the activated domains only.
inline DbResult query(const Database& db, const BeliefState& b, const DomainState& d,
                      const Ontology& ont) {
  DbResult out;
  for (int domain = 0; domain < ont.n_domains(); ++domain)
    if (d.active(domain))
      out.counts[domain] = bucket_of(db.match_count(ont, domain, b));
  return out;
}

// The matching entity with the smallest id, for reproducible lexicalization.
inline const EntityRecord* select_entity(const Database& db, int domain, const BeliefState& b,
                                         const Ontology& ont) {
  for (const auto& e : db.entities(domain))  // already sorted by id
    if (db.matches(e, ont, b)) return &e;
  return nullptr;
}

// DB file: {"synonyms": {...}, "entities": {"restaurant": [{"id":...,
// "attributes": {...}, "extras": {...}}, ...], ...}}
inline Database load_database(const std::string& path, const Ontology& ont) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("database " + path + ": " + e.what());
  }
  std::map<std::string, std::string> synonyms;
  if (root.contains("synonyms"))
    for (const auto& [k, val] : root["synonyms"].items())
      synonyms[to_lower(trim(k))] = val.get<std::string>();

  std::vector<EntityRecord> entities;
  if (!root.contains("entities") || !root["entities"].is_object())
    throw ConfigError("database " + path + ": missing 'entities' object");
  for (const auto& [dname, list] : root["entities"].items()) {
    int domain = ont.domain_index(dname);
    if (domain < 0)
      throw ConfigError("database " + path + ": unknown domain '" + dname + "'");
    for (const auto& je : list) {
      EntityRecord e;
      e.domain = domain;
      if (!je.contains("id"))
        throw ConfigError("database " + path + ": entity in domain '" + dname +
                          "' is missing 'id'");
      e.id = je["id"].get<std::string>();
      if (je.contains("attributes"))
        for (const auto& [k, val] : je["attributes"].items())
          e.attributes[k] = val.get<std::string>();
      if (je.contains("extras"))
        for (const auto& [k, val] : je["extras"].items())
          e.extras[k] = val.get<std::string>();
      entities.push_back(std::move(e));
    }
  }
  return Database(ont, std::move(entities), std::move(synonyms));
}

}  // namespace dots
