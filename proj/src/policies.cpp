#include "digca/policies.hpp"

namespace digca {

bool phi(AgentId self, AgentId announcer, int childCountOfSelf, const PolicyConfig& cfg) {
    return self < announcer && childCountOfSelf < cfg.maxOutDegree;
}

std::optional<AgentId> selectRespondent(const std::vector<Respondent>& respondents,
                                        const PolicyConfig& cfg) {
    (void)cfg;  // only one tie-break policy so far
    std::optional<Respondent> best;
    for (const Respondent& r : respondents) {
        if (!best || r.childCount < best->childCount ||
            (r.childCount == best->childCount && r.id < best->id)) {
            best = r;
        }
    }
    if (!best) return std::nullopt;
    return best->id;
}

}  // namespace digca
