#pragma once

#include <optional>
#include <vector>

#include "digca/types.hpp"

namespace digca {

enum class TieBreak { LowestId };

struct PolicyConfig {
    int maxOutDegree = 3;  // >= 1
    TieBreak tieBreak = TieBreak::LowestId;
};

// Response determinant: should agent `self` answer an Announce from `announcer`?
// True iff self.index < announcer.index and self still has child capacity.
// Depends only on its arguments, so concurrent evaluations are consistent.
bool phi(AgentId self, AgentId announcer, int childCountOfSelf, const PolicyConfig& cfg);

// Selection over the gathered respondents: minimal child count, ties broken by
// lowest id. Empty list -> nullopt. Pure and deterministic.
std::optional<AgentId> selectRespondent(const std::vector<Respondent>& respondents,
                                        const PolicyConfig& cfg);

}  // namespace digca
