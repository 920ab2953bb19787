// SPDX-License-Identifier: Apache-2.0
//
// Executable form of the role prompts' decision rules. Used as the offline
// backend and as the labelling reference when scoring other backends.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sopagent/action_repository.hpp"
#include "sopagent/backends.hpp"
#include "sopagent/execution_memory.hpp"
#include "sopagent/roles.hpp"
#include "sopagent/sop.hpp"

namespace sopagent {
class RetrievalIndex;
}

namespace sopagent::oracle {

inline constexpr std::string_view kSeekExternalKnowledge = "seek external knowledge";
inline constexpr std::string_view kTerminateFlow = "terminate the flow";

enum class Polarity { unknown, positive, negative };

Polarity polarity(std::string_view text);
bool looks_like_question(std::string_view text);
bool looks_like_go_back(std::string_view text);
/// Domain errors that point at bad user-supplied data ("invalid listing id",
/// "missing parameter ..."), as opposed to transport failures.
bool is_param_error(std::string_view observation);

/// Picks the branch whose guard the observation satisfies. "else" guards are
/// taken only when nothing else matches. Returns nullopt when no branch fits.
std::optional<std::size_t> choose_branch(std::span<const std::string> guards,
                                         std::string_view observation);

/// State decision rules, replayed over the whole memory so the current
/// position in the workflow is recovered without hidden state.
class StateOracle {
public:
    StateOracle(std::shared_ptr<const ActionRepository> gar,
                std::shared_ptr<const RetrievalIndex> index);

    /// Throws Error{NoMatchingBranch} when an observation fits no guard or the
    /// memory cannot be placed on the workflow.
    [[nodiscard]] StateDecision decide(const SopWorkflow& workflow,
                                       const ExecutionMemory& memory) const;

private:
    std::shared_ptr<const ActionRepository> gar_;
    std::shared_ptr<const RetrievalIndex> index_;
};

/// "ask user to provide listing id" -> "listing ID".
std::string asked_entity(std::string_view action);
/// "ask user to provide listing id" -> "Could you please provide the listing ID?"
std::string question_for(std::string_view action);
/// Maps generic slot names onto required params by word overlap.
/// Throws Error{MissingParam} naming the first param without a slot.
std::map<std::string, std::string> map_params(std::span<const std::string> params,
                                              const SlotMap& slots);
/// As map_params, but leaves out params that have no slot.
std::map<std::string, std::string> map_available_params(std::span<const std::string> params,
                                                        const SlotMap& slots);
/// Query from the last failed user reply, with "it"/"this"/"that" resolved to
/// the entity the preceding question asked for.
std::string search_query_for(const ExecutionMemory& memory);

/// Action role. Throws Error{MissingParam}.
ActionData execute_action(const ActionRequest& request);

enum class InputFormat { yes_no, otp, phone, email, identifier, free_text };

InputFormat format_for(std::string_view expected_format);
/// Extracted entity value when the reply satisfies the format.
std::optional<std::string> match_format(InputFormat format, std::string_view reply);
/// "an alphanumeric listing ID" -> "listing id value"
std::string slot_key_for(std::string_view expected_format);
std::string spell_correct(std::string_view reply, std::span<const std::string> vocabulary);

/// User role.
UserTurn user_turn(const UserRequest& request);

}  // namespace sopagent::oracle
