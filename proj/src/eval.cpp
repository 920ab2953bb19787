// SPDX-License-Identifier: Apache-2.0
#include "sopagent/eval.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include "sopagent/error.hpp"
#include "sopagent/oracle.hpp"
#include "sopagent/retrieval.hpp"
#include "sopagent/text.hpp"

namespace sopagent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<InputCategory, 6> kCategories = {InputCategory::valid,     InputCategory::chitchat,
                                                      InputCategory::gibberish, InputCategory::question,
                                                      InputCategory::invalid,   InputCategory::bad_format};

}  // namespace

std::string_view to_string(InputCategory c) noexcept {
    switch (c) {
        case InputCategory::valid: return "valid";
        case InputCategory::chitchat: return "chitchat";
        case InputCategory::gibberish: return "gibberish";
        case InputCategory::question: return "question";
        case InputCategory::invalid: return "invalid";
        case InputCategory::bad_format: return "bad_format";
    }
    return "valid";
}

std::optional<InputCategory> parse_input_category(std::string_view s) {
    const auto n = text::replace_all(text::to_lower(text::trim(s)), "-", "_");
    for (auto c : kCategories) {
        if (to_string(c) == n) return c;
    }
    return std::nullopt;
}

SyntheticSuite suite_from_json(const json& j, std::string name) {
    SyntheticSuite s;
    s.name = std::move(name);
    try {
        s.sop = j.at("sop").get<std::string>();
        s.sessions = j.value("sessions", std::size_t{0});
        const auto user_inputs = j.value("user_inputs", json::object());
        const auto api_responses = j.value("api_responses", json::object());
        const auto weights = j.value("category_weights", json::object());
        for (const auto& [action, pools] : user_inputs.items()) {
            auto& target = s.user_inputs[action];
            for (const auto& [cat, values] : pools.items()) {
                const auto c = parse_input_category(cat);
                if (!c) throw Error(ErrorCode::SchemaError, "unknown input category '" + cat + "'");
                target[*c] = values.get<std::vector<std::string>>();
            }
        }
        for (const auto& [endpoint, outcomes] : api_responses.items()) {
            auto& list = s.api_responses[endpoint];
            for (const auto& o : outcomes) list.push_back(api_outcome_from_json(o));
        }
        for (const auto& [cat, w] : weights.items()) {
            const auto c = parse_input_category(cat);
            if (!c) throw Error(ErrorCode::SchemaError, "unknown input category '" + cat + "'");
            s.category_weights[*c] = w.get<double>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, "suite " + s.name + ": " + e.what());
    }
    return s;
}

SyntheticSuite load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    try {
        return suite_from_json(json::parse(in), fs::path(path).stem().string());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path + ": " + e.what());
    }
}

std::vector<SyntheticSuite> load_suite_dir(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SyntheticSuite> out;
    for (const auto& f : files) out.push_back(load_suite(f.string()));
    return out;
}

std::vector<GeneratedSession> generate_sessions(const SyntheticSuite& suite, std::size_t n, std::uint64_t seed,
                                                std::size_t queue_length) {
    for (const auto& [action, pools] : suite.user_inputs) {
        const bool any = std::any_of(pools.begin(), pools.end(), [](const auto& p) { return !p.second.empty(); });
        if (!any) throw Error(ErrorCode::EmptyPool, "no user inputs for '" + action + "' in suite " + suite.name);
    }
    for (const auto& [endpoint, outcomes] : suite.api_responses) {
        if (outcomes.empty()) throw Error(ErrorCode::EmptyPool, "no API outcomes for '" + endpoint + "'");
    }

    // std::mt19937_64 output is fixed by the standard; the samplers below only
    // use raw draws so results do not depend on the library's distributions.
    std::mt19937_64 rng(seed);
    auto pick_index = [&rng](std::size_t size) { return static_cast<std::size_t>(rng() % size); };
    auto pick_weighted = [&rng](const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return weights.size() - 1;
    };

    std::vector<GeneratedSession> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        GeneratedSession g;
        g.name = suite.name + "#" + std::to_string(i);
        g.script.sop = suite.sop;
        for (const auto& [action, pools] : suite.user_inputs) {
            std::vector<InputCategory> cats;
            std::vector<double> weights;
            for (const auto& [cat, values] : pools) {
                if (values.empty()) continue;
                const auto w = suite.category_weights.find(cat);
                const double weight = w == suite.category_weights.end() ? 1.0 : w->second;
                if (weight <= 0.0) continue;
                cats.push_back(cat);
                weights.push_back(weight);
            }
            if (cats.empty()) throw Error(ErrorCode::EmptyPool, "all categories weighted out for '" + action + "'");
            auto& replies = g.script.user_replies_by_action[action];
            for (std::size_t k = 0; k < queue_length; ++k) {
                const auto& values = pools.at(cats[pick_weighted(weights)]);
                replies.push_back(values[pick_index(values.size())]);
            }
        }
        for (const auto& [endpoint, outcomes] : suite.api_responses) {
            auto& queue = g.script.api_responses[endpoint];
            for (std::size_t k = 0; k < queue_length; ++k) queue.push_back(outcomes[pick_index(outcomes.size())]);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GeneratedSession> generate_suite_sessions(std::span<const SyntheticSuite> suites, std::uint64_t seed) {
    std::vector<GeneratedSession> out;
    for (std::size_t i = 0; i < suites.size(); ++i) {
        auto part = generate_sessions(suites[i], suites[i].sessions, seed + i);
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

std::size_t count_correct_states(std::span<const StateLabel> labels) {
    std::size_t i = 0;
    while (i < labels.size() && labels[i].predicted == labels[i].expected) ++i;
    return i;
}

AccuracyReport& AccuracyReport::operator+=(const AccuracyReport& o) noexcept {
    sessions += o.sessions;
    states += o.states;
    state_correct += o.state_correct;
    question_generation += o.question_generation;
    parameter_extraction += o.parameter_extraction;
    search_query_generation += o.search_query_generation;
    return *this;
}

json AccuracyReport::to_json(std::string_view backend) const {
    auto task = [](const TaskScore& t) {
        return json{{"correct", t.correct}, {"total", t.total}, {"accuracy", t.accuracy()}};
    };
    json j{{"sessions", sessions},
           {"states", states},
           {"state_correct", state_correct},
           {"state_accuracy", state_accuracy()},
           {"action_accuracy",
            {{"question_generation", task(question_generation)},
             {"parameter_extraction", task(parameter_extraction)},
             {"search_query_generation", task(search_query_generation)}}}};
    if (!backend.empty()) j["backend"] = std::string(backend);
    return j;
}

std::string AccuracyReport::to_table(std::string_view backend) const {
    const std::string name = backend.empty() ? "backend" : std::string(backend);
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "Sessions: " << sessions << "  States: " << states << "\n\n";
    out << std::left << std::setw(24) << "Model" << "State accuracy\n";
    out << std::setw(24) << name << state_accuracy() << "\n\n";
    out << std::setw(24) << "Model" << std::setw(22) << "Question generation" << std::setw(22)
        << "Parameter extraction" << "Search query generation\n";
    out << std::setw(24) << name << std::setw(22) << question_generation.accuracy() << std::setw(22)
        << parameter_extraction.accuracy() << search_query_generation.accuracy() << "\n\n";
    return out.str();
}

SessionOutcome run_scored_session(const Workspace& ws, const GeneratedSession& session, RoleBackends predictor) {
    const auto workflow = ws.sop(session.script.sop);
    SessionOutcome outcome;
    outcome.name = session.name;
    const oracle::StateOracle labeller(ws.toolkit->gar, ws.toolkit->index);

    Session s(session.name, workflow, ws.toolkit, std::move(predictor),
              scripted_environment(session.script, ws.registry, ws.knowledge), ws.config.engine);
    StepObserver observer;
    observer.on_decision = [&](const DecisionRecord& record) {
        std::string expected(kUnresolvedState);
        try {
            const auto d = labeller.decide(*workflow, record.memory_before);
            expected = ws.toolkit->gar->find(d.next_action) ? d.next_action
                                                            : ws.toolkit->index->best_match(d.next_action).action;
        } catch (const Error&) {
        }
        outcome.states.push_back({record.action.value_or(std::string(kUnresolvedState)), std::move(expected)});
        outcome.tasks.emplace_back();
    };
    observer.on_action_task = [&](const ActionTaskRecord& record) {
        if (outcome.tasks.empty()) outcome.tasks.emplace_back();
        outcome.tasks.back().push_back(record);
    };
    s.set_observer(std::move(observer));
    run_to_completion(s);
    outcome.status = s.state().status;
    outcome.turns = s.state().turns;
    return outcome;
}

AccuracyReport score_state_accuracy(std::span<const SessionOutcome> outcomes) {
    AccuracyReport r;
    for (const auto& o : outcomes) {
        ++r.sessions;
        r.states += o.states.size();
        r.state_correct += count_correct_states(o.states);
    }
    return r;
}

AccuracyReport score_action_tasks(std::span<const SessionOutcome> outcomes) {
    AccuracyReport r;
    for (const auto& o : outcomes) {
        const auto correct = count_correct_states(o.states);
        for (std::size_t i = 0; i < correct && i < o.tasks.size(); ++i) {
            for (const auto& t : o.tasks[i]) {
                switch (t.task) {
                    case ActionType::ask_user_input: {
                        ++r.question_generation.total;
                        const auto entity = oracle::asked_entity(t.request.action);
                        if (t.produced && t.produced->user_interaction &&
                            text::contains_ci(*t.produced->user_interaction, entity)) {
                            ++r.question_generation.correct;
                        }
                        break;
                    }
                    case ActionType::api_call: {
                        ++r.parameter_extraction.total;
                        const auto expected = oracle::map_available_params(t.request.params, t.request.slots);
                        if (t.produced && t.produced->params.value_or(std::map<std::string, std::string>{}) == expected) {
                            ++r.parameter_extraction.correct;
                        }
                        break;
                    }
                    case ActionType::external_knowledge: {
                        ++r.search_query_generation.total;
                        if (t.produced && t.produced->search_query &&
                            text::normalize_loose(*t.produced->search_query) ==
                                text::normalize_loose(oracle::search_query_for(t.request.memory))) {
                            ++r.search_query_generation.correct;
                        }
                        break;
                    }
                    case ActionType::message_to_user:
                        break;
                }
            }
        }
    }
    return r;
}

AccuracyReport evaluate(const Workspace& ws, std::span<const GeneratedSession> sessions,
                        const PredictorFactory& predictor, unsigned threads) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, std::max<std::size_t>(1, sessions.size()));

    auto score_range = [&](std::size_t begin, std::size_t end) {
        std::vector<SessionOutcome> outcomes;
        for (std::size_t i = begin; i < end; ++i) outcomes.push_back(run_scored_session(ws, sessions[i], predictor()));
        auto report = score_state_accuracy(outcomes);
        const auto tasks = score_action_tasks(outcomes);
        report.question_generation = tasks.question_generation;
        report.parameter_extraction = tasks.parameter_extraction;
        report.search_query_generation = tasks.search_query_generation;
        return report;
    };

    if (threads <= 1) return score_range(0, sessions.size());
    std::vector<std::future<AccuracyReport>> parts;
    const std::size_t chunk = (sessions.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < sessions.size(); begin += chunk) {
        parts.push_back(std::async(std::launch::async, score_range, begin, std::min(sessions.size(), begin + chunk)));
    }
    AccuracyReport total;
    for (auto& p : parts) total += p.get();
    return total;
}

}  // namespace sopagent
