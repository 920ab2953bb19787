// SPDX-License-Identifier: Apache-2.0
#include "sopagent/oracle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <set>

#include "sopagent/environments.hpp"
#include "sopagent/error.hpp"
#include "sopagent/retrieval.hpp"
#include "sopagent/text.hpp"

namespace sopagent::oracle {

namespace {

using WordSet = std::set<std::string>;

bool in(std::string_view w, std::initializer_list<std::string_view> set) {
    return std::find(set.begin(), set.end(), w) != set.end();
}

WordSet word_set(std::string_view s, std::initializer_list<std::string_view> stop = {}) {
    WordSet out;
    for (auto& w : text::words(s)) {
        if (!in(w, stop)) out.insert(std::move(w));
    }
    return out;
}

bool subset(const WordSet& a, const WordSet& b) {
    return !a.empty() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::size_t overlap(const WordSet& a, const WordSet& b) {
    std::size_t n = 0;
    for (const auto& w : a) n += b.count(w);
    return n;
}

std::string upper_acronyms(std::string s) {
    s = std::regex_replace(s, std::regex(R"(\bid\b)"), "ID");
    s = std::regex_replace(s, std::regex(R"(\botp\b)"), "OTP");
    return s;
}

std::string strip_prefix(std::string s, std::initializer_list<std::string_view> prefixes) {
    bool again = true;
    while (again) {
        again = false;
        for (auto p : prefixes) {
            if (s.starts_with(p)) {
                s.erase(0, p.size());
                again = true;
            }
        }
    }
    return s;
}

bool has_article(std::string_view s) {
    return s.starts_with("the ") || s.starts_with("a ") || s.starts_with("an ") || s.starts_with("your ");
}

}  // namespace

// ---------------------------------------------------------------------------
// Text classification

// Like text::words, but keeps apostrophes so "don't" stays one token.
std::vector<std::string> contraction_words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text::to_lower(s)) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
            cur += c;
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Polarity polarity(std::string_view s) {
    bool positive = false;
    for (const auto& w : contraction_words(s)) {
        if (in(w, {"no", "not", "don't", "dont", "doesn't", "doesnt", "cannot", "can't", "cant", "never", "nope",
                   "lost", "without", "nah"})) {
            return Polarity::negative;
        }
        if (in(w, {"yes", "yeah", "yep", "yup", "sure", "have", "has", "do", "does", "can", "ok", "okay", "correct",
                   "right"})) {
            positive = true;
        }
    }
    return positive ? Polarity::positive : Polarity::unknown;
}

bool looks_like_question(std::string_view s) {
    const auto t = text::trim(s);
    if (t.empty()) return false;
    if (t.back() == '?') return true;
    const auto ws = text::words(t);
    if (ws.empty()) return false;
    return in(ws.front(), {"how", "where", "what", "why", "when", "which", "who", "can", "could", "is", "do",
                           "does", "should", "would"});
}

bool looks_like_go_back(std::string_view s) {
    return text::contains_ci(s, "go back") || text::contains_ci(s, "previous") ||
           text::contains_ci(s, "earlier step");
}

bool is_param_error(std::string_view observation) {
    const auto ws = text::words(observation);
    return std::any_of(ws.begin(), ws.end(), [](const std::string& w) {
               return in(w, {"invalid", "incorrect", "wrong", "missing", "mismatch", "expired"});
           }) ||
           text::contains_ci(observation, "not found");
}

// ---------------------------------------------------------------------------
// Guards

namespace {

std::string normalize_guard(std::string_view guard) {
    auto g = text::collapse_whitespace(text::to_lower(guard));
    while (!g.empty() && (g.back() == ':' || g.back() == ' ')) g.pop_back();
    if (g.starts_with("if ")) g.erase(0, 3);
    return strip_prefix(g, {"its ", "it's ", "it is "});
}

bool is_else(std::string_view guard) {
    const auto g = text::to_lower(text::trim(guard));
    return g == "else" || g == "else:" || g.starts_with("else ");
}

std::optional<double> first_number(std::string_view s) {
    static const std::regex re(R"((\d+(?:\.\d+)?))");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(s.begin(), s.end(), m, re)) return std::nullopt;
    return std::stod(m[1].str());
}

// Numeric comparison guards. nullopt when the guard is not numeric.
std::optional<bool> numeric_guard(const std::string& g, std::string_view observation) {
    struct Op {
        std::string_view phrase;
        int kind;  // 0 <=, 1 <, 2 >, 3 >=
    };
    static constexpr std::array<Op, 7> kOps = {{{"less than or equal to", 0},
                                                {"at most", 0},
                                                {"greater than or equal to", 3},
                                                {"at least", 3},
                                                {"less than", 1},
                                                {"more than", 2},
                                                {"greater than", 2}}};
    for (const auto& op : kOps) {
        const auto pos = g.find(op.phrase);
        if (pos == std::string::npos) continue;
        const auto bound = first_number(std::string_view(g).substr(pos + op.phrase.size()));
        if (!bound) continue;
        const auto value = first_number(observation);
        if (!value) return false;
        switch (op.kind) {
            case 0: return *value <= *bound;
            case 1: return *value < *bound;
            case 2: return *value > *bound;
            default: return *value >= *bound;
        }
    }
    return std::nullopt;
}

bool label_match(const std::string& g, const WordSet& obs) {
    static const std::regex kOr(" or ");
    for (std::sregex_token_iterator it(g.begin(), g.end(), kOr, -1), end; it != end; ++it) {
        const auto alt = word_set(it->str(), {"if", "its", "it's", "it", "is", "the", "a", "an", "user", "of"});
        if (subset(alt, obs) || subset(obs, alt)) return true;
    }
    return false;
}

Polarity guard_polarity(const std::string& g) {
    const auto ws = text::words(g);
    const bool negated = std::any_of(ws.begin(), ws.end(), [](const std::string& w) {
        return in(w, {"not", "no", "doesn't", "don't", "cannot", "can't", "never"});
    });
    return negated ? Polarity::negative : Polarity::positive;
}

}  // namespace

std::optional<std::size_t> choose_branch(std::span<const std::string> guards, std::string_view observation) {
    std::optional<std::size_t> else_branch;
    std::vector<std::string> normalized(guards.size());
    for (std::size_t i = 0; i < guards.size(); ++i) {
        if (is_else(guards[i])) {
            if (!else_branch) else_branch = i;
            continue;
        }
        normalized[i] = normalize_guard(guards[i]);
    }
    auto active = [&](std::size_t i) { return !is_else(guards[i]); };

    for (std::size_t i = 0; i < guards.size(); ++i) {
        if (!active(i)) continue;
        if (auto r = numeric_guard(normalized[i], observation); r.has_value()) {
            if (*r) return i;
        }
    }
    const auto obs_polarity = polarity(observation);
    for (std::size_t i = 0; i < guards.size(); ++i) {
        if (!active(i)) continue;
        if ((normalized[i] == "yes" && obs_polarity == Polarity::positive) ||
            (normalized[i] == "no" && obs_polarity == Polarity::negative)) {
            return i;
        }
    }
    const auto obs = word_set(observation, {"if", "its", "it's", "it", "is", "the", "a", "an", "user", "of"});
    for (std::size_t i = 0; i < guards.size(); ++i) {
        if (!active(i) || numeric_guard(normalized[i], observation).has_value()) continue;
        if (normalized[i] == "yes" || normalized[i] == "no") continue;
        if (label_match(normalized[i], obs)) return i;
    }
    if (obs_polarity != Polarity::unknown) {
        for (std::size_t i = 0; i < guards.size(); ++i) {
            if (!active(i) || numeric_guard(normalized[i], observation).has_value()) continue;
            if (normalized[i] == "yes" || normalized[i] == "no") continue;
            if (guard_polarity(normalized[i]) == obs_polarity) return i;
        }
    }
    return else_branch;
}

// ---------------------------------------------------------------------------
// Action role

std::string asked_entity(std::string_view action) {
    auto a = text::collapse_whitespace(text::to_lower(action));
    const auto pos = a.rfind("ask ");
    if (pos != std::string::npos) {
        a = a.substr(pos + 4);
        a = strip_prefix(a, {"user ", "to provide ", "to enter ", "to share ", "about ", "for ", "the "});
    }
    return upper_acronyms(a);
}

std::string question_for(std::string_view action) {
    const auto lower = text::collapse_whitespace(text::to_lower(action));
    const auto entity = asked_entity(action);
    if (lower.find("ask user about ") != std::string::npos) {
        return "Could you please tell me about " + std::string(has_article(entity) ? "" : "your ") + entity + "?";
    }
    return "Could you please provide " + std::string(has_article(entity) ? "" : "the ") + entity + "?";
}

namespace {

WordSet key_words(std::string_view key) {
    return word_set(key, {"the", "a", "an", "value", "to", "on", "of", "for", "your", "my", "received"});
}

double jaccard(const WordSet& a, const WordSet& b) {
    if (a.empty() || b.empty()) return 0.0;
    const auto inter = overlap(a, b);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::optional<std::string> slot_for(const std::string& param, const SlotMap& slots) {
    const auto pw = key_words(param);
    double best = 0.0;
    const std::string* value = nullptr;
    for (const auto& [key, v] : slots) {
        // Every param word must be named by the slot: "old email" never fills old_email_otp.
        const auto kw = key_words(key);
        if (overlap(pw, kw) != pw.size()) continue;
        const double s = jaccard(pw, kw);
        if (s > best) {
            best = s;
            value = &v;
        }
    }
    if (best < 0.5 || value == nullptr) return std::nullopt;
    return *value;
}

}  // namespace

std::map<std::string, std::string> map_params(std::span<const std::string> params, const SlotMap& slots) {
    std::map<std::string, std::string> out;
    for (const auto& p : params) {
        auto v = slot_for(p, slots);
        if (!v) throw Error(ErrorCode::MissingParam, p);
        out.emplace(p, std::move(*v));
    }
    return out;
}

std::map<std::string, std::string> map_available_params(std::span<const std::string> params,
                                                        const SlotMap& slots) {
    std::map<std::string, std::string> out;
    for (const auto& p : params) {
        if (auto v = slot_for(p, slots)) out.emplace(p, std::move(*v));
    }
    return out;
}

std::string search_query_for(const ExecutionMemory& memory) {
    if (memory.empty()) throw Error(ErrorCode::InvalidArgument, "no history to form a search query from");
    const MemoryEntry* source = &memory.back();
    for (auto it = memory.entries().rbegin(); it != memory.entries().rend(); ++it) {
        if (it->feedback == Feedback::fail && it->action != kSeekExternalKnowledge) {
            source = &*it;
            break;
        }
    }
    auto q = text::collapse_whitespace(source->observation);
    const auto entity = asked_entity(source->action);
    q = std::regex_replace(q, std::regex(R"(\b(it|this|that)\b)", std::regex::icase), "my " + entity);
    while (!q.empty() && (q.back() == '.' || q.back() == '!')) q.pop_back();
    if (!q.empty()) q[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(q[0])));
    if (!q.empty() && q.back() != '?') q += '?';
    return q;
}

ActionData execute_action(const ActionRequest& request) {
    ActionData d;
    if (request.types.contains(ActionType::api_call)) {
        d.thought = "The action needs an API call, so each required param is filled from the matching slot.";
        d.params = map_params(request.params, request.slots);
    }
    if (request.types.contains(ActionType::ask_user_input)) {
        d.thought = "The action asks the user for input, so a polite question is formed from the action.";
        d.user_interaction = question_for(request.action);
    }
    if (request.types.contains(ActionType::external_knowledge)) {
        d.thought = "The user asked a question, so a short search query is formed from it.";
        d.search_query = search_query_for(request.memory);
    }
    if (request.types.contains(ActionType::message_to_user)) {
        d.thought = "The action conveys a message, so the text from the context is passed on.";
        d.user_interaction = request.message.empty() ? "I am retrying the " + request.action + "." : request.message;
    }
    return d;
}

// ---------------------------------------------------------------------------
// User role

InputFormat format_for(std::string_view expected_format) {
    const auto f = " " + text::to_lower(expected_format) + " ";
    if (f.find("yes or no") != std::string::npos) return InputFormat::yes_no;
    if (f.find("otp") != std::string::npos) return InputFormat::otp;
    if (f.find("phone") != std::string::npos) return InputFormat::phone;
    if (f.find("email") != std::string::npos) return InputFormat::email;
    if (f.find(" id ") != std::string::npos || f.find("alphanumeric") != std::string::npos) {
        return InputFormat::identifier;
    }
    return InputFormat::free_text;
}

std::optional<std::string> match_format(InputFormat format, std::string_view reply) {
    const std::string r(reply);
    std::smatch m;
    switch (format) {
        case InputFormat::yes_no: {
            const auto p = polarity(r);
            if (p == Polarity::unknown) return std::nullopt;
            return std::string(p == Polarity::positive ? "yes" : "no");
        }
        case InputFormat::otp: {
            static const std::regex re(R"((?:^|[^0-9])([0-9]{4,8})(?:[^0-9]|$))");
            if (std::regex_search(r, m, re)) return m[1].str();
            return std::nullopt;
        }
        case InputFormat::phone: {
            static const std::regex re(R"((\+?[0-9][0-9 -]{8,}[0-9]))");
            if (!std::regex_search(r, m, re)) return std::nullopt;
            std::string digits;
            for (char c : m[1].str()) {
                if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
            }
            if (digits.size() < 10 || digits.size() > 13) return std::nullopt;
            return digits;
        }
        case InputFormat::email: {
            static const std::regex re(R"(([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}))");
            if (std::regex_search(r, m, re)) return m[1].str();
            return std::nullopt;
        }
        case InputFormat::identifier: {
            static const std::regex re(R"([A-Za-z0-9]{5,})");
            for (std::sregex_iterator it(r.begin(), r.end(), re), end; it != end; ++it) {
                const auto tok = it->str();
                const bool digit = std::any_of(tok.begin(), tok.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                });
                const bool upper = std::all_of(tok.begin(), tok.end(), [](char c) {
                    return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c));
                });
                if (digit || upper) return tok;
            }
            return std::nullopt;
        }
        case InputFormat::free_text: {
            const auto t = text::trim(r);
            if (t.empty()) return std::nullopt;
            return t;
        }
    }
    return std::nullopt;
}

namespace {

std::string entity_of_format(std::string_view expected_format) {
    auto f = text::collapse_whitespace(expected_format);
    bool again = true;
    while (again) {
        again = false;
        for (std::string_view p : {"the ", "a ", "an ", "The ", "A ", "An ", "alphanumeric ", "valid ", "numeric ",
                                   "10-digit "}) {
            if (f.starts_with(p)) {
                f.erase(0, p.size());
                again = true;
            }
        }
    }
    return f;
}

}  // namespace

std::string slot_key_for(std::string_view expected_format) {
    return text::to_lower(entity_of_format(expected_format)) + " value";
}

std::string spell_correct(std::string_view reply, std::span<const std::string> vocabulary) {
    auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
    auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    std::string out;
    std::size_t i = 0;
    const std::string r(reply);
    while (i < r.size()) {
        if (std::isspace(static_cast<unsigned char>(r[i]))) {
            out += r[i++];
            continue;
        }
        std::size_t j = i;
        while (j < r.size() && !std::isspace(static_cast<unsigned char>(r[j]))) ++j;
        // only whole words: "lisint," is a candidate, "old-mail.com" is not
        std::size_t core_begin = i;
        std::size_t core_end = j;
        while (core_begin < core_end && is_punct(r[core_begin])) ++core_begin;
        while (core_end > core_begin && is_punct(r[core_end - 1])) --core_end;
        const std::string word = r.substr(core_begin, core_end - core_begin);
        out += r.substr(i, core_begin - i);
        i = j;
        const bool known = std::find(vocabulary.begin(), vocabulary.end(), word) != vocabulary.end();
        if (word.size() < 4 || known || !std::all_of(word.begin(), word.end(), is_lower)) {
            out += word;
        } else {
            const std::size_t budget = word.size() <= 4 ? 1 : 2;
            const std::string* best = nullptr;
            std::size_t best_d = budget + 1;
            for (const auto& v : vocabulary) {
                if (v.size() < 3) continue;
                const auto d = text::edit_distance(word, v);
                if (d < best_d) {
                    best_d = d;
                    best = &v;
                }
            }
            out += best ? *best : word;
        }
        out += r.substr(core_end, j - core_end);
    }
    return out;
}

UserTurn user_turn(const UserRequest& request) {
    std::vector<std::string> vocab = {"listing", "email", "address", "phone", "number", "otp", "old",
                                      "new", "access", "request", "status", "account", "seller", "have",
                                      "find", "where", "what", "how", "provide", "yes", "received", "sent"};
    for (const auto& w : text::words(request.question + " " + request.expected_format)) {
        if (std::all_of(w.begin(), w.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); }) &&
            std::find(vocab.begin(), vocab.end(), w) == vocab.end()) {
            vocab.push_back(w);
        }
    }
    UserTurn u;
    const auto corrected = text::collapse_whitespace(spell_correct(request.reply, vocab));
    u.corrected_reply = corrected.empty() ? request.reply : corrected;
    const auto format = format_for(request.expected_format);

    if (looks_like_go_back(corrected)) {
        u.thought = "The user wants to return to an earlier step, so the reply does not answer the question.";
        u.input_validation = Feedback::fail;
        u.user_response = "Sure, let us go back to the earlier step.";
        return u;
    }
    if (looks_like_question(corrected)) {
        u.thought = "The reply is a question from the user, not the requested input.";
        u.input_validation = Feedback::fail;
        u.user_response = "I am working on it, please wait.";
        return u;
    }
    const auto value = match_format(format, corrected);
    if (!value) {
        u.thought = "The reply does not include " + request.expected_format + ".";
        u.input_validation = Feedback::fail;
        u.user_response = "Sorry, that does not look like " + request.expected_format + ".";
        return u;
    }
    u.thought = "The reply includes " + request.expected_format + ".";
    u.input_validation = Feedback::success;
    u.slots.emplace(slot_key_for(request.expected_format), *value);
    u.user_response = format == InputFormat::yes_no
                          ? "Thank you for confirming."
                          : "Thank you for providing the " + entity_of_format(request.expected_format) + ".";
    return u;
}

// ---------------------------------------------------------------------------
// State role

StateOracle::StateOracle(std::shared_ptr<const ActionRepository> gar, std::shared_ptr<const RetrievalIndex> index)
    : gar_(std::move(gar)), index_(std::move(index)) {}

namespace {

class Replay {
public:
    Replay(const SopWorkflow& wf, const ActionRepository& gar, const RetrievalIndex* index) : wf_(wf), gar_(gar) {
        for (const auto& [id, node] : wf.nodes) {
            if (node.kind == NodeKind::condition) continue;
            std::string resolved = node.label;
            if (node.kind == NodeKind::terminal) {
                resolved = std::string(kTerminateFlow);
            } else if (!gar.find(node.label) && index != nullptr) {
                resolved = index->best_match(node.label).action;
            }
            ids_.emplace(id, resolved);
        }
    }

    std::string run(const ExecutionMemory& memory) {
        std::optional<NodeId> next = first_executable(wf_.root, "");
        std::optional<NodeId> resume;
        std::vector<NodeId> path;
        bool ended = false;

        for (const auto& e : memory.entries()) {
            if (e.action == kSeekExternalKnowledge) {
                if (!resume) throw Error(ErrorCode::NoMatchingBranch, "knowledge lookup without an interrupted action");
                next = resume;
                resume.reset();
                pending_question_ = false;
                continue;
            }
            if (e.action == kTerminateFlow) {
                ended = true;
                continue;
            }
            const NodeId node = locate(e.action, next, path);
            const auto* entry = gar_.find(e.action);
            if (e.feedback == Feedback::success) {
                path.push_back(node);
                next = advance(node, e.observation);
                continue;
            }
            const bool has_api = entry && entry->has(ActionType::api_call);
            const bool asks = entry && entry->has(ActionType::ask_user_input);
            const bool api_failed = has_api && (!asks || is_error_observation(e.observation));
            if (api_failed) {
                next = is_param_error(e.observation) ? collector_of(node, e.observation, path) : node;
                continue;
            }
            if (asks && looks_like_go_back(e.observation)) {
                next = go_back_target(node, e.observation, path);
                continue;
            }
            if (asks && looks_like_question(e.observation)) {
                resume = node;
                next.reset();
                pending_question_ = true;
                continue;
            }
            next = node;
        }

        if (pending_question_ && resume) return std::string(kSeekExternalKnowledge);
        if (ended) return std::string(kTerminateFlow);
        if (!next) throw Error(ErrorCode::NoMatchingBranch, "no guard matches '" + last_observation_ + "'");
        return ids_.at(*next);
    }

private:
    NodeId locate(const std::string& action, const std::optional<NodeId>& expected,
                  const std::vector<NodeId>& path) const {
        pending_question_ = false;
        if (expected && ids_.at(*expected) == action) return *expected;
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            if (ids_.at(*it) == action) return *it;
        }
        for (const auto& [id, resolved] : ids_) {
            if (resolved == action) return id;
        }
        throw Error(ErrorCode::NoMatchingBranch, "action '" + action + "' is not part of workflow " + wf_.name);
    }

    // Walks through condition runs using the observation; nullopt when a
    // condition run has no matching branch.
    std::optional<NodeId> first_executable(NodeId start, const std::string& observation) {
        const auto& node = wf_.node(start);
        if (node.kind != NodeKind::condition) return start;
        return through_conditions(std::vector<NodeId>{start}, observation);
    }

    std::optional<NodeId> through_conditions(const std::vector<NodeId>& run, const std::string& observation) {
        std::vector<std::string> guards;
        for (auto id : run) guards.push_back(wf_.node(id).label);
        const auto pick = choose_branch(guards, observation);
        if (!pick) {
            last_observation_ = observation;
            return std::nullopt;
        }
        return advance_children(run[*pick], observation);
    }

    std::optional<NodeId> advance_children(NodeId from, const std::string& observation) {
        const auto& node = wf_.node(from);
        if (node.children.empty()) return std::nullopt;
        std::vector<NodeId> conditions;
        for (const auto& edge : node.children) {
            if (wf_.node(edge.target).kind == NodeKind::condition) conditions.push_back(edge.target);
        }
        if (conditions.empty()) return node.children.front().target;
        return through_conditions(conditions, observation);
    }

    std::optional<NodeId> advance(NodeId from, const std::string& observation) {
        const auto& node = wf_.node(from);
        if (node.kind == NodeKind::terminal) return from;
        if (node.children.empty()) return std::nullopt;
        return advance_children(from, observation);
    }

    bool asks(NodeId id) const {
        const auto* e = gar_.find(ids_.at(id));
        return e && e->has(ActionType::ask_user_input);
    }

    WordSet collected_words(NodeId id) const {
        const auto* e = gar_.find(ids_.at(id));
        WordSet w = word_set(ids_.at(id));
        if (e && e->user_interaction_metadata) {
            const auto m = word_set(*e->user_interaction_metadata);
            w.insert(m.begin(), m.end());
        }
        return w;
    }

    // The ask action whose collected value the failing API call used.
    NodeId collector_of(NodeId failing, const std::string& observation, const std::vector<NodeId>& path) const {
        const auto* entry = gar_.find(ids_.at(failing));
        WordSet param_words;
        if (entry) {
            for (const auto& p : entry->params) {
                const auto ws = word_set(p);
                param_words.insert(ws.begin(), ws.end());
            }
        }
        const auto obs = word_set(observation, {"invalid", "incorrect", "wrong", "missing", "mismatch", "expired",
                                                "not", "found", "parameter", "the", "a", "an", "is", "error"});
        std::optional<NodeId> best;
        std::pair<std::size_t, std::size_t> best_score{0, 0};
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            if (*it == failing || !asks(*it)) continue;
            const auto words = collected_words(*it);
            const auto by_param = overlap(param_words, words);
            if (by_param == 0) continue;
            const std::pair<std::size_t, std::size_t> score{overlap(obs, words), by_param};
            if (!best || score > best_score) {
                best = *it;
                best_score = score;
            }
        }
        return best.value_or(failing);
    }

    NodeId go_back_target(NodeId current, const std::string& observation, const std::vector<NodeId>& path) const {
        const auto obs = word_set(observation, {"go", "back", "previous", "earlier", "step", "i", "want", "to",
                                                "the", "a", "an", "please", "let", "me", "can", "we"});
        std::optional<NodeId> best;
        std::size_t best_score = 0;
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            if (*it == current || !asks(*it)) continue;
            const auto score = overlap(obs, collected_words(*it));
            if (!best || score > best_score) {
                best = *it;
                best_score = score;
            }
        }
        return best.value_or(current);
    }

    const SopWorkflow& wf_;
    const ActionRepository& gar_;
    std::map<NodeId, std::string> ids_;
    mutable bool pending_question_ = false;
    std::string last_observation_;
};

}  // namespace

StateDecision StateOracle::decide(const SopWorkflow& workflow, const ExecutionMemory& memory) const {
    Replay replay(workflow, *gar_, index_.get());
    StateDecision d;
    d.next_action = replay.run(memory);
    if (memory.empty()) {
        d.thought = "The execution memory is empty, so the first action of the workflow comes next.";
    } else if (memory.back().feedback == Feedback::success) {
        d.thought = "The last action succeeded with observation '" + memory.back().observation +
                    "', so the workflow continues with the matching next action.";
    } else {
        d.thought = "The last action failed with observation '" + memory.back().observation +
                    "', so the logical action to recover is chosen.";
    }
    return d;
}

}  // namespace sopagent::oracle
