#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dots/common.hpp"
#include "dots/ontology.hpp"

namespace dots {

// ---------------------------------------------------------------------------
// The four structured pipeline states
//
// Domain state, belief state, DB result and system action are plain values.
// Each has an exact token serialization; the parsers invert it and repair
// near-miss sequences coming out of the decoders.

// Binary activation flag per ontology domain, total over all domains.
class DomainState {
 public:
  DomainState() = default;
  explicit DomainState(const Ontology& ont) : active_(ont.n_domains(), 0) {}

  bool active(int domain) const { return active_.at(domain) != 0; }
  void set(int domain, bool on) { active_.at(domain) = on ? 1 : 0; }
  int n_domains() const { return static_cast<int>(active_.size()); }

  std::vector<int> active_domains() const {
    std::vector<int> out;
    for (int d = 0; d < n_domains(); ++d)
      if (active_[d]) out.push_back(d);
    return out;
  }

  bool operator==(const DomainState& o) const = default;

 private:
  std::vector<std::uint8_t> active_;
};

// Total map (domain, informable slot) -> value. The empty string stands for
// the unfilled marker and serializes as [NULL].
class BeliefState {
 public:
  BeliefState() = default;
  explicit BeliefState(const Ontology& ont) : values_(ont.n_informable_slots()) {}

  const std::string& value(const Ontology& ont, int domain, int slot) const {
    return values_.at(ont.flat_slot_index(domain, slot));
  }

  void set(const Ontology& ont, int domain, int slot, const std::string& value) {
    if (!value.empty() && !ont.value_legal(domain, slot, value))
      throw ConfigError("illegal value '" + value + "' for slot " +
                        ont.domain(domain).name + "-" + ont.domain(domain).informable[slot].name);
    values_.at(ont.flat_slot_index(domain, slot)) = value;
  }

  bool empty() const {
    for (const auto& v : values_)
      if (!v.empty()) return false;
    return true;
  }

  int filled_count(const Ontology& ont, int domain) const {
    int n = 0;
    for (std::size_t s = 0; s < ont.domain(domain).informable.size(); ++s)
      if (!value(ont, domain, static_cast<int>(s)).empty()) ++n;
    return n;
  }

  bool operator==(const BeliefState& o) const = default;

 private:
  std::vector<std::string> values_;
};

// Match-count bucket per domain; only domains active in the accompanying
// DomainState may appear.
struct DbResult {
  std::map<int, DbBucket> counts;  // domain index -> bucket, ordered

  bool operator==(const DbResult& o) const = default;
};

struct DialogAct {
  int domain = -1;
  ActType type = ActType::kInform;
  std::string slot;  // empty = NULL

  bool operator==(const DialogAct& o) const = default;
};

// Ordered act list with a deterministic canonical order:
// (domain order, act type order, slot order); NULL slots sort first.
class SystemAction {
 public:
  SystemAction() = default;

  explicit SystemAction(std::vector<DialogAct> acts, const Ontology& ont)
      : acts_(std::move(acts)) {
    canonicalize(ont);
  }

  const std::vector<DialogAct>& acts() const { return acts_; }
  bool empty() const { return acts_.empty(); }

  bool has(int domain, ActType type) const {
    for (const auto& a : acts_)
      if (a.domain == domain && a.type == type) return true;
    return false;
  }

  bool operator==(const SystemAction& o) const = default;

 private:
  void canonicalize(const Ontology& ont) {
    for (const auto& a : acts_) {
      if (a.domain < 0 || a.domain >= ont.n_domains())
        throw ConfigError("system action references unknown domain index " +
                          std::to_string(a.domain));
      if (!a.slot.empty() && ont.domain(a.domain).slot_order(a.slot) < 0)
        throw ConfigError("system action references unknown slot '" + a.slot + "' in domain " +
                          ont.domain(a.domain).name);
    }
    auto key = [&ont](const DialogAct& a) {
      int slot_order = a.slot.empty() ? -1 : ont.domain(a.domain).slot_order(a.slot);
      return std::tuple<int, int, int>(a.domain, static_cast<int>(a.type), slot_order);
    };
    std::sort(acts_.begin(), acts_.end(),
              [&key](const DialogAct& x, const DialogAct& y) { return key(x) < key(y); });
    acts_.erase(std::unique(acts_.begin(), acts_.end()), acts_.end());
  }

  std::vector<DialogAct> acts_;
};

struct Utterance {
  std::string raw;
  TokenSeq tokens;
};

inline Utterance make_utterance(const std::string& text, const Vocabulary& vocab) {
  return Utterance{text, tokenize(text, vocab)};
}

struct Response {
  std::string raw;
  TokenSeq tokens;
  bool delexicalized = false;
};

// ---------------------------------------------------------------------------
// Serialization

// D_t: for each domain in ontology order, the domain token followed by
// [ON] or [OFF].
inline TokenSeq serialize_domain_state(const DomainState& d, const Ontology& ont,
                                       const Vocabulary& vocab) {
  if (d.n_domains() != ont.n_domains())
    throw ConfigError("domain state is not total over the ontology domains");
  TokenSeq out;
  out.reserve(2 * ont.n_domains());
  for (int i = 0; i < ont.n_domains(); ++i) {
    out.push_back(vocab.domain_token(i));
    out.push_back(d.active(i) ? vocab.on_tok() : vocab.off_tok());
  }
  return out;
}

// B_t: all domains and all slots; per domain the domain token, then per slot
// the slot-name tokens, "-", the value tokens ([NULL] when unfilled), "-".
inline TokenSeq serialize_belief_state(const BeliefState& b, const Ontology& ont,
                                       const Vocabulary& vocab) {
  TokenSeq out;
  for (int d = 0; d < ont.n_domains(); ++d) {
    out.push_back(vocab.domain_token(d));
    const auto& dom = ont.domain(d);
    for (std::size_t s = 0; s < dom.informable.size(); ++s) {
      tokenize_into(dom.informable[s].name, vocab, out);
      out.push_back(vocab.delim());
      const std::string& val = b.value(ont, d, static_cast<int>(s));
      if (val.empty())
        out.push_back(vocab.null_tok());
      else
        tokenize_into(val, vocab, out);
      out.push_back(vocab.delim());
    }
  }
  return out;
}

// DB_t: domain token plus bucket token, for activated domains only.
inline TokenSeq serialize_db_result(const DbResult& db, const DomainState& d,
                                    const Ontology& ont, const Vocabulary& vocab) {
  TokenSeq out;
  for (const auto& [domain, bucket] : db.counts) {
    if (domain < 0 || domain >= ont.n_domains())
      throw ConfigError("db result references unknown domain index " + std::to_string(domain));
    if (!d.active(domain))
      throw ConfigError("db result contains inactive domain " + ont.domain(domain).name);
    out.push_back(vocab.domain_token(domain));
    out.push_back(vocab.bucket_token(bucket));
  }
  return out;
}

// A_t: per act the domain token, the act-type token, "-", the slot tokens
// ([NULL] when absent), "-".
inline TokenSeq serialize_action(const SystemAction& a, const Ontology& ont,
                                 const Vocabulary& vocab) {
  TokenSeq out;
  for (const auto& act : a.acts()) {
    out.push_back(vocab.domain_token(act.domain));
    out.push_back(vocab.act_token(act.type));
    out.push_back(vocab.delim());
    if (act.slot.empty())
      out.push_back(vocab.null_tok());
    else
      tokenize_into(act.slot, vocab, out);
    out.push_back(vocab.delim());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing (inverse of the serializers, with repair)
//
// The decoders emit unconstrained token sequences, so early in training these
// see plenty of malformed input. Repair rules: missing value -> [NULL];
// unknown token where a value or slot is expected -> [NULL] / skip; duplicate
// slot mention -> last writer wins. A sequence that does not even start like
// a serialized state is unrepairable and raises ParseError.

template <typename T>
struct ParseResult {
  T value;
  bool repaired = false;
  std::vector<std::string> notes;

  void flag(std::string note) {
    repaired = true;
    notes.push_back(std::move(note));
  }
};

inline ParseResult<DomainState> parse_domain_state(const TokenSeq& tokens, const Ontology& ont,
                                                   const Vocabulary& vocab) {
  if (tokens.empty()) throw ParseError("empty domain state sequence", 0);
  if (vocab.domain_of_token(tokens[0]) < 0)
    throw ParseError("domain state does not start with a domain token", 0);
  ParseResult<DomainState> res;
  res.value = DomainState(ont);
  std::size_t i = 0;
  while (i < tokens.size()) {
    int d = vocab.domain_of_token(tokens[i]);
    if (d < 0) {
      res.flag("unexpected token '" + vocab.surface(tokens[i]) + "' skipped");
      ++i;
      continue;
    }
    ++i;
    if (i < tokens.size() && (tokens[i] == vocab.on_tok() || tokens[i] == vocab.off_tok())) {
      res.value.set(d, tokens[i] == vocab.on_tok());
      ++i;
    } else {
      res.flag("missing [ON]/[OFF] after " + vocab.surface(vocab.domain_token(d)) +
               ", repaired to [OFF]");
    }
  }
  if (!res.repaired && serialize_domain_state(res.value, ont, vocab) != tokens)
    res.flag("non-canonical domain state sequence");
  return res;
}

namespace detail {

// Reads tokens up to the next delimiter or domain token. Returns consumed ids.
inline TokenSeq read_group(const TokenSeq& tokens, std::size_t& i, const Vocabulary& vocab) {
  TokenSeq out;
  while (i < tokens.size() && tokens[i] != vocab.delim() &&
         vocab.domain_of_token(tokens[i]) < 0)
    out.push_back(tokens[i++]);
  return out;
}

inline std::string render(const TokenSeq& tokens, const Vocabulary& vocab) {
  return detokenize(tokens, vocab);
}

}  // namespace detail

inline ParseResult<BeliefState> parse_belief_state(const TokenSeq& tokens, const Ontology& ont,
                                                   const Vocabulary& vocab) {
  if (tokens.empty()) throw ParseError("empty belief state sequence", 0);
  if (vocab.domain_of_token(tokens[0]) < 0)
    throw ParseError("belief state does not start with a domain token", 0);

  ParseResult<BeliefState> res;
  res.value = BeliefState(ont);
  std::size_t i = 0;
  int cur = -1;
  while (i < tokens.size()) {
    int d = vocab.domain_of_token(tokens[i]);
    if (d >= 0) {
      cur = d;
      ++i;
      continue;
    }
    TokenSeq slot_toks = detail::read_group(tokens, i, vocab);
    if (i >= tokens.size() || tokens[i] != vocab.delim()) {
      res.flag("slot group without delimiter near position " + std::to_string(i));
      continue;  // resync at the next domain token
    }
    ++i;  // slot/value delimiter
    TokenSeq value_toks = detail::read_group(tokens, i, vocab);
    if (i < tokens.size() && tokens[i] == vocab.delim())
      ++i;  // trailing delimiter
    else
      res.flag("missing trailing delimiter after value near position " + std::to_string(i));

    const auto& dom = ont.domain(cur);
    int slot = -1;
    for (std::size_t s = 0; s < dom.informable.size(); ++s)
      if (slot_toks == tokenize(dom.informable[s].name, vocab)) {
        slot = static_cast<int>(s);
        break;
      }
    if (slot < 0) {
      res.flag("unknown slot '" + detail::render(slot_toks, vocab) + "' in domain " + dom.name);
      continue;
    }
    std::string value;
    if (value_toks.empty()) {
      res.flag("missing value for " + dom.name + "-" + dom.informable[slot].name +
               ", repaired to [NULL]");
    } else if (value_toks.size() == 1 && value_toks[0] == vocab.null_tok()) {
      // unfilled
    } else {
      std::string surface = to_lower(detail::render(value_toks, vocab));
      if (surface == kDontcare) {
        value = kDontcare;
      } else {
        for (const auto& cand : dom.informable[slot].values)
          if (to_lower(cand) == surface) {
            value = cand;
            break;
          }
        if (value.empty())
          res.flag("illegal value '" + surface + "' for " + dom.name + "-" +
                   dom.informable[slot].name + ", repaired to [NULL]");
      }
    }
    res.value.set(ont, cur, slot, value);  // duplicate mention: last writer wins
  }
  if (!res.repaired && serialize_belief_state(res.value, ont, vocab) != tokens)
    res.flag("non-canonical belief sequence");
  return res;
}

inline ParseResult<SystemAction> parse_action(const TokenSeq& tokens, const Ontology& ont,
                                              const Vocabulary& vocab) {
  ParseResult<SystemAction> res;
  if (tokens.empty()) {
    res.value = SystemAction({}, ont);  // the empty action list is legal
    return res;
  }
  std::vector<DialogAct> acts;
  std::size_t i = 0;
  bool any_group = false;
  while (i < tokens.size()) {
    int d = vocab.domain_of_token(tokens[i]);
    if (d < 0) {
      res.flag("unexpected token '" + vocab.surface(tokens[i]) + "' outside an act group");
      ++i;
      continue;
    }
    ++i;
    if (i >= tokens.size()) {
      res.flag("dangling domain token at end of action sequence");
      break;
    }
    auto act = vocab.act_of_token(tokens[i]);
    if (!act) {
      res.flag("expected act type after domain token, found '" + vocab.surface(tokens[i]) + "'");
      continue;  // resync at the next domain token
    }
    ++i;
    any_group = true;
    if (i < tokens.size() && tokens[i] == vocab.delim())
      ++i;
    else
      res.flag("missing delimiter after act type");
    TokenSeq slot_toks = detail::read_group(tokens, i, vocab);
    if (i < tokens.size() && tokens[i] == vocab.delim())
      ++i;
    else
      res.flag("missing trailing delimiter after act slot");

    std::string slot;
    if (slot_toks.empty() || (slot_toks.size() == 1 && slot_toks[0] == vocab.null_tok())) {
      if (slot_toks.empty()) res.flag("missing act slot, repaired to [NULL]");
    } else {
      std::string surface = to_lower(detail::render(slot_toks, vocab));
      for (const auto& name : ont.domain(d).all_slots())
        if (to_lower(name) == surface) {
          slot = name;
          break;
        }
      if (slot.empty())
        res.flag("unknown act slot '" + surface + "' in domain " + ont.domain(d).name +
                 ", repaired to [NULL]");
    }
    acts.push_back(DialogAct{d, *act, slot});
  }
  if (!any_group)
    throw ParseError("no act group could be parsed from a non-empty action sequence", 0);
  res.value = SystemAction(std::move(acts), ont);
  if (!res.repaired && serialize_action(res.value, ont, vocab) != tokens)
    res.flag("non-canonical action sequence");
  return res;
}

inline ParseResult<DbResult> parse_db_result(const TokenSeq& tokens, const Ontology& ont,
                                             const Vocabulary& vocab) {
  ParseResult<DbResult> res;
  std::size_t i = 0;
  while (i < tokens.size()) {
    int d = vocab.domain_of_token(tokens[i]);
    if (d < 0) {
      res.flag("unexpected token '" + vocab.surface(tokens[i]) + "' in db result");
      ++i;
      continue;
    }
    ++i;
    if (i < tokens.size() && vocab.bucket_of_token(tokens[i])) {
      res.value.counts[d] = *vocab.bucket_of_token(tokens[i]);
      ++i;
    } else {
      res.flag("missing bucket token after domain in db result");
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Input contexts (C^B_t, C^A_t, C^R_t)

enum class ContextKind { kBelief = 0, kAction, kResponse };

inline const char* context_kind_name(ContextKind k) {
  static const char* names[] = {"belief", "action", "response"};
  return names[static_cast<int>(k)];
}

struct Context {
  ContextKind kind = ContextKind::kBelief;
  TokenSeq tokens;
  bool truncated = false;
};

inline constexpr int kMaxContextLength = 512;

// Layout: [CLS] utterance [SEP] D B (DB) (A). On overflow the utterance loses
// tokens from its head; the state segments are never cut.
inline Context build_context(ContextKind kind, const Utterance& u, const DomainState& d,
                             const BeliefState& b, const DbResult* db, const SystemAction* a,
                             const Ontology& ont, const Vocabulary& vocab,
                             int max_len = kMaxContextLength) {
  const bool needs_db = kind == ContextKind::kAction || kind == ContextKind::kResponse;
  const bool needs_action = kind == ContextKind::kResponse;
  if (needs_db && db == nullptr)
    throw ConfigError(std::string("build_context: ") + context_kind_name(kind) +
                      " context requires a db result");
  if (needs_action && a == nullptr)
    throw ConfigError("build_context: response context requires a system action");
  if (!needs_db && db != nullptr)
    throw ConfigError("build_context: belief context must not carry a db result");
  if (!needs_action && a != nullptr)
    throw ConfigError(std::string("build_context: ") + context_kind_name(kind) +
                      " context must not carry a system action");

  TokenSeq state;
  {
    TokenSeq t = serialize_domain_state(d, ont, vocab);
    state.insert(state.end(), t.begin(), t.end());
    t = serialize_belief_state(b, ont, vocab);
    state.insert(state.end(), t.begin(), t.end());
    if (needs_db) {
      t = serialize_db_result(*db, d, ont, vocab);
      state.insert(state.end(), t.begin(), t.end());
    }
    if (needs_action) {
      t = serialize_action(*a, ont, vocab);
      state.insert(state.end(), t.begin(), t.end());
    }
  }

  const int fixed = 2 + static_cast<int>(state.size());  // [CLS] ... [SEP] + state
  if (fixed > max_len)
    throw ConfigError("context state segments alone exceed the maximum length (" +
                      std::to_string(fixed) + " > " + std::to_string(max_len) + ")");

  Context ctx;
  ctx.kind = kind;
  std::size_t keep = u.tokens.size();
  if (fixed + static_cast<int>(keep) > max_len) {
    keep = static_cast<std::size_t>(max_len - fixed);
    ctx.truncated = true;
  }
  ctx.tokens.reserve(fixed + keep);
  ctx.tokens.push_back(vocab.cls());
  ctx.tokens.insert(ctx.tokens.end(), u.tokens.end() - keep, u.tokens.end());
  ctx.tokens.push_back(vocab.sep());
  ctx.tokens.insert(ctx.tokens.end(), state.begin(), state.end());
  return ctx;
}

}  // namespace dots
