#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dots/common.hpp"

namespace dots {

// ---------------------------------------------------------------------------
// Closed token classes
//
// The system action inventory and the DB match-count buckets are fixed; each
// member is backed by one special token in the vocabulary.

enum class ActType { kInform = 0, kRequest, kOffer, kBook, kNooffer, kGreet, kBye };

inline constexpr int kNumActTypes = 7;

inline const char* act_type_name(ActType a) {
  static const char* names[] = {"inform", "request", "offer", "book",
                                "nooffer", "greet", "bye"};
  return names[static_cast<int>(a)];
}

inline std::optional<ActType> act_type_from_name(const std::string& s) {
  for (int i = 0; i < kNumActTypes; ++i)
    if (s == act_type_name(static_cast<ActType>(i))) return static_cast<ActType>(i);
  return std::nullopt;
}

enum class DbBucket { kZero = 0, kOne, kTwoToThree, kFourPlus };

inline DbBucket bucket_of(int count) {
  if (count <= 0) return DbBucket::kZero;
  if (count == 1) return DbBucket::kOne;
  if (count <= 3) return DbBucket::kTwoToThree;
  return DbBucket::kFourPlus;
}

inline const char* bucket_surface(DbBucket b) {
  static const char* names[] = {"[DB0]", "[DB1]", "[DB2-3]", "[DB4+]"};
  return names[static_cast<int>(b)];
}

inline constexpr int kNumDbBuckets = 4;

// The empty-slot marker and the user "anything goes" value.
inline const std::string kDontcare = "dontcare";

// ---------------------------------------------------------------------------
// Ontology

struct SlotDef {
  std::string name;
  std::vector<std::string> values;  // closed candidate list, never empty
};

struct DomainDef {
  std::string name;
  std::vector<SlotDef> informable;
  std::vector<std::string> requestable;

  int informable_index(const std::string& slot) const {
    for (std::size_t i = 0; i < informable.size(); ++i)
      if (informable[i].name == slot) return static_cast<int>(i);
    return -1;
  }

  int requestable_index(const std::string& slot) const {
    for (std::size_t i = 0; i < requestable.size(); ++i)
      if (requestable[i] == slot) return static_cast<int>(i);
    return -1;
  }

  // informable slots first, then requestables not already informable;
  // this is the canonical per-domain slot order used by placeholders and
  // system-action serialization.
  std::vector<std::string> all_slots() const {
    std::vector<std::string> out;
    for (const auto& s : informable) out.push_back(s.name);
    for (const auto& r : requestable)
      if (informable_index(r) < 0) out.push_back(r);
    return out;
  }

  int slot_order(const std::string& slot) const {  // -1 if unknown
    auto slots = all_slots();
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] == slot) return static_cast<int>(i);
    return -1;
  }
};

class Ontology {
 public:
  Ontology() = default;

  explicit Ontology(std::vector<DomainDef> domains) : domains_(std::move(domains)) {
    validate();
    index();
  }

  int n_domains() const { return static_cast<int>(domains_.size()); }
  const DomainDef& domain(int i) const { return domains_.at(i); }
  const std::vector<DomainDef>& domains() const { return domains_; }

  int domain_index(const std::string& name) const {
    auto it = domain_index_.find(name);
    return it == domain_index_.end() ? -1 : it->second;
  }

  // Flat indexing over all (domain, informable slot) pairs, in ontology order.
  int n_informable_slots() const { return n_informable_; }
  int flat_slot_index(int domain, int slot) const { return offsets_.at(domain) + slot; }
  std::pair<int, int> slot_of_flat(int flat) const {  // (domain, slot)
    for (int d = n_domains() - 1; d >= 0; --d)
      if (flat >= offsets_[d]) return {d, flat - offsets_[d]};
    throw ConfigError("flat slot index out of range");
  }

  bool value_legal(int domain, int slot, const std::string& value) const {
    if (value == kDontcare) return true;
    const auto& vals = domains_.at(domain).informable.at(slot).values;
    return std::find(vals.begin(), vals.end(), value) != vals.end();
  }

 private:
  void validate() const {
    std::set<std::string> names;
    for (const auto& d : domains_) {
      if (!names.insert(d.name).second)
        throw ConfigError("duplicate domain name: " + d.name);
      std::set<std::string> slots;
      for (const auto& s : d.informable) {
        if (!slots.insert(s.name).second)
          throw ConfigError("duplicate informable slot '" + s.name + "' in domain " + d.name);
        if (s.values.empty())
          throw ConfigError("informable slot '" + s.name + "' in domain " + d.name +
                            " has an empty value list");
      }
      std::set<std::string> reqs;
      for (const auto& r : d.requestable)
        if (!reqs.insert(r).second)
          throw ConfigError("duplicate requestable slot '" + r + "' in domain " + d.name);
    }
  }

  void index() {
    offsets_.clear();
    n_informable_ = 0;
    for (std::size_t i = 0; i < domains_.size(); ++i) {
      domain_index_[domains_[i].name] = static_cast<int>(i);
      offsets_.push_back(n_informable_);
      n_informable_ += static_cast<int>(domains_[i].informable.size());
    }
  }

  std::vector<DomainDef> domains_;
  std::unordered_map<std::string, int> domain_index_;
  std::vector<int> offsets_;
  int n_informable_ = 0;
};

// Ontology file: {"domains":[{"name":..., "informable":[{"slot":..., "values":[...]}],
// "requestable":[...]}]}
inline Ontology load_ontology(const std::string& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("ontology " + path + ": " + e.what());
  }
  if (!root.contains("domains") || !root["domains"].is_array())
    throw ConfigError("ontology " + path + ": missing 'domains' array");

  std::vector<DomainDef> domains;
  int di = 0;
  for (const auto& jd : root["domains"]) {
    const std::string at = "domains[" + std::to_string(di++) + "]";
    DomainDef d;
    if (!jd.contains("name") || !jd["name"].is_string())
      throw ConfigError("ontology " + path + ": " + at + ": missing 'name'");
    d.name = jd["name"].get<std::string>();
    if (jd.contains("informable")) {
      int si = 0;
      for (const auto& js : jd["informable"]) {
        const std::string sat = at + ".informable[" + std::to_string(si++) + "]";
        if (!js.contains("slot") || !js["slot"].is_string())
          throw ConfigError("ontology " + path + ": " + sat + ": missing 'slot'");
        SlotDef s;
        s.name = js["slot"].get<std::string>();
        if (js.contains("values"))
          for (const auto& v : js["values"]) s.values.push_back(v.get<std::string>());
        d.informable.push_back(std::move(s));
      }
    }
    if (jd.contains("requestable"))
      for (const auto& r : jd["requestable"]) d.requestable.push_back(r.get<std::string>());
    domains.push_back(std::move(d));
  }
  return Ontology(std::move(domains));  // validates invariants
}

// ---------------------------------------------------------------------------
// Vocabulary

class Vocabulary {
 public:
  Vocabulary() = default;

  int size() const { return static_cast<int>(tokens_.size()); }
  int n_special() const { return n_special_; }

  int id(const std::string& surface) const {
    auto it = ids_.find(surface);
    return it == ids_.end() ? -1 : it->second;
  }

  const std::string& surface(int id) const {
    if (id < 0 || id >= size())
      throw std::out_of_range("token id " + std::to_string(id) + " out of range (vocab size " +
                              std::to_string(size()) + ")");
    return tokens_[id];
  }

  bool is_special(int id) const { return id >= 0 && id < n_special_; }

  int cls() const { return cls_; }
  int sep() const { return sep_; }
  int unk() const { return unk_; }
  int bos() const { return bos_; }
  int eos() const { return eos_; }
  int on_tok() const { return on_; }
  int off_tok() const { return off_; }
  int null_tok() const { return null_; }
  int delim() const { return delim_; }

  int bucket_token(DbBucket b) const { return bucket0_ + static_cast<int>(b); }
  int act_token(ActType a) const { return act0_ + static_cast<int>(a); }
  int domain_token(int domain) const { return domain_tokens_.at(domain); }

  // -1 when the id is not a domain token
  int domain_of_token(int id) const {
    for (std::size_t i = 0; i < domain_tokens_.size(); ++i)
      if (domain_tokens_[i] == id) return static_cast<int>(i);
    return -1;
  }

  std::optional<ActType> act_of_token(int id) const {
    if (id >= act0_ && id < act0_ + kNumActTypes)
      return static_cast<ActType>(id - act0_);
    return std::nullopt;
  }

  std::optional<DbBucket> bucket_of_token(int id) const {
    if (id >= bucket0_ && id < bucket0_ + kNumDbBuckets)
      return static_cast<DbBucket>(id - bucket0_);
    return std::nullopt;
  }

  int placeholder_token(int domain, const std::string& slot) const {
    auto it = placeholder_ids_.find({domain, slot});
    return it == placeholder_ids_.end() ? -1 : it->second;
  }

  // (domain, slot) behind a placeholder token, if it is one
  std::optional<std::pair<int, std::string>> placeholder_of_token(int id) const {
    auto it = placeholder_slots_.find(id);
    if (it == placeholder_slots_.end()) return std::nullopt;
    return it->second;
  }

  static std::string placeholder_surface(const std::string& domain, const std::string& slot) {
    return "[" + domain + "_" + slot + "]";
  }

  friend Vocabulary build_vocabulary(const Ontology&, const std::vector<std::string>&);
  friend Vocabulary load_vocabulary(const std::string&, const Ontology&);

 private:
  void push(const std::string& surface, bool special) {
    if (ids_.count(surface))
      throw ConfigError("vocabulary: duplicate token surface '" + surface + "'");
    ids_[surface] = static_cast<int>(tokens_.size());
    tokens_.push_back(surface);
    if (special) n_special_ = static_cast<int>(tokens_.size());
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  int n_special_ = 0;

  int cls_ = -1, sep_ = -1, unk_ = -1, bos_ = -1, eos_ = -1;
  int on_ = -1, off_ = -1, null_ = -1, delim_ = -1;
  int bucket0_ = -1, act0_ = -1;
  std::vector<int> domain_tokens_;
  std::map<std::pair<int, std::string>, int> placeholder_ids_;
  std::unordered_map<int, std::pair<int, std::string>> placeholder_slots_;
};

// Builds the closed token inventory from the ontology, then appends word
// tokens: first the ontology's own words (slot names, candidate values,
// "dontcare"), then the given corpus words in sorted order. Deterministic for
// a given ontology and word set.
inline Vocabulary build_vocabulary(const Ontology& ont,
                                   const std::vector<std::string>& corpus_words) {
  Vocabulary v;
  v.push("[CLS]", true); v.cls_ = v.size() - 1;
  v.push("[SEP]", true); v.sep_ = v.size() - 1;
  v.push("[UNK]", true); v.unk_ = v.size() - 1;
  v.push("[BOS]", true); v.bos_ = v.size() - 1;
  v.push("[EOS]", true); v.eos_ = v.size() - 1;
  v.push("[ON]", true); v.on_ = v.size() - 1;
  v.push("[OFF]", true); v.off_ = v.size() - 1;
  v.push("[NULL]", true); v.null_ = v.size() - 1;
  v.push("-", true); v.delim_ = v.size() - 1;

  v.bucket0_ = v.size();
  for (int b = 0; b < kNumDbBuckets; ++b)
    v.push(bucket_surface(static_cast<DbBucket>(b)), true);

  v.act0_ = v.size();
  for (int a = 0; a < kNumActTypes; ++a)
    v.push("[" + std::string(act_type_name(static_cast<ActType>(a))) + "]", true);

  for (int d = 0; d < ont.n_domains(); ++d) {
    v.push("[" + ont.domain(d).name + "]", true);
    v.domain_tokens_.push_back(v.size() - 1);
  }

  for (int d = 0; d < ont.n_domains(); ++d) {
    for (const auto& slot : ont.domain(d).all_slots()) {
      v.push(Vocabulary::placeholder_surface(ont.domain(d).name, slot), true);
      int id = v.size() - 1;
      v.placeholder_ids_[{d, slot}] = id;
      v.placeholder_slots_[id] = {d, slot};
    }
  }

  // word tokens contributed by the ontology itself
  auto push_word = [&v](const std::string& w) {
    if (v.ids_.count(w) == 0) v.push(w, false);
  };
  for (const auto& d : ont.domains()) {
    for (const auto& s : d.informable) {
      push_word(s.name);
      for (const auto& val : s.values)
        for (const auto& piece : split_whitespace(val)) push_word(piece);
    }
    for (const auto& r : d.requestable) push_word(r);
  }
  push_word(kDontcare);

  std::vector<std::string> words = corpus_words;
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  for (const auto& w : words) {
    if (w.empty()) continue;
    int existing = v.id(w);
    if (existing >= 0) {
      if (v.is_special(existing))
        throw ConfigError("corpus word '" + w + "' collides with a special token");
      continue;  // already present as an ontology word
    }
    v.push(w, false);
  }
  return v;
}

// One token per line, specials first, order = id.
inline void save_vocabulary(const Vocabulary& v, const std::string& path) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    out += v.surface(i);
    out += '\n';
  }
  write_text_file(path, out);
}

inline Vocabulary load_vocabulary(const std::string& path, const Ontology& ont) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  // Rebuild the special prefix from the ontology and check the file agrees;
  // everything after the specials is plain words.
  Vocabulary expected = build_vocabulary(ont, {});
  if (static_cast<int>(lines.size()) < expected.n_special())
    throw ConfigError("vocabulary file " + path + " is shorter than the special-token inventory");
  for (int i = 0; i < expected.n_special(); ++i)
    if (lines[i] != expected.surface(i))
      throw ConfigError("vocabulary file " + path + " line " + std::to_string(i + 1) +
                        ": expected special token '" + expected.surface(i) + "', found '" +
                        lines[i] + "'");

  Vocabulary v = expected;
  for (std::size_t i = expected.size(); i < lines.size(); ++i) {
    if (lines[i].empty())
      throw ConfigError("vocabulary file " + path + ": empty line " + std::to_string(i + 1));
    if (v.ids_.count(lines[i]))
      throw ConfigError("vocabulary file " + path + ": duplicate token '" + lines[i] + "'");
    v.push(lines[i], false);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Tokenization
//
// Whitespace split first; a chunk that exactly matches a special-token surface
// (placeholders in delexicalized responses, the "-" delimiter) becomes that
// token. Anything else is lowercased and broken into alphanumeric runs, with
// out-of-vocabulary runs mapping to [UNK].

inline void tokenize_into(const std::string& text, const Vocabulary& vocab, TokenSeq& out) {
  for (const auto& chunk : split_whitespace(text)) {
    int sid = vocab.id(chunk);
    if (sid >= 0 && vocab.is_special(sid)) {
      out.push_back(sid);
      continue;
    }
    std::string run;
    auto flush = [&]() {
      if (run.empty()) return;
      int id = vocab.id(run);
      out.push_back(id >= 0 && !vocab.is_special(id) ? id : vocab.unk());
      run.clear();
    };
    for (char c : chunk) {
      unsigned char uc = static_cast<unsigned char>(c);
      if (std::isalnum(uc))
        run += static_cast<char>(std::tolower(uc));
      else
        flush();  // punctuation separates words and is dropped
    }
    flush();
  }
}

inline TokenSeq tokenize(const std::string& text, const Vocabulary& vocab) {
  TokenSeq out;
  tokenize_into(text, vocab, out);
  return out;
}

inline std::string detokenize(const TokenSeq& tokens, const Vocabulary& vocab) {
  std::vector<std::string> parts;
  parts.reserve(tokens.size());
  for (int id : tokens) parts.push_back(vocab.surface(id));
  return join(parts, " ");
}

}  // namespace dots
