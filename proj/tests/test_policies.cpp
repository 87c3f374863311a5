#include <optional>
#include <vector>

#include "digca/policies.hpp"
#include "digca/rng.hpp"
#include "doctest.h"

using namespace digca;

namespace {
AgentId id(uint32_t i) { return AgentId{i}; }
}  // namespace

TEST_CASE("response determinant: frozen cases") {
    PolicyConfig cfg;  // maxOutDegree = 3
    CHECK(phi(id(2), id(5), 0, cfg));        // lower id, capacity free
    CHECK_FALSE(phi(id(5), id(5), 0, cfg));  // self-announce is never answered
    CHECK_FALSE(phi(id(5), id(2), 0, cfg));  // higher id never volunteers
    CHECK_FALSE(phi(id(2), id(5), 3, cfg));  // at capacity
    CHECK(phi(id(2), id(5), 2, cfg));        // one slot left
}

TEST_CASE("response determinant: antisymmetry and capacity over random pairs") {
    RngStream rng(20240816);
    PolicyConfig cfg;
    for (int t = 0; t < 2000; ++t) {
        AgentId a{static_cast<uint32_t>(rng.index(64))};
        AgentId b{static_cast<uint32_t>(rng.index(64))};
        int cc = static_cast<int>(rng.index(5));
        // At most one side of any pair may volunteer, whatever the counts.
        const bool bothRespond = phi(a, b, cc, cfg) && phi(b, a, cc, cfg);
        CHECK_FALSE(bothRespond);
        if (cc >= cfg.maxOutDegree) CHECK_FALSE(phi(a, b, cc, cfg));
        if (a.index == b.index) CHECK_FALSE(phi(a, b, cc, cfg));
    }
}

TEST_CASE("respondent selection: frozen cases") {
    PolicyConfig cfg;
    SUBCASE("fewest children wins") {
        std::vector<Respondent> rs = {{id(4), 2}, {id(7), 0}};
        REQUIRE(selectRespondent(rs, cfg).has_value());
        CHECK(selectRespondent(rs, cfg)->index == 7);
    }
    SUBCASE("empty list selects nobody") {
        CHECK_FALSE(selectRespondent({}, cfg).has_value());
    }
    SUBCASE("ties break toward the lowest id") {
        std::vector<Respondent> rs = {{id(4), 0}, {id(7), 0}};
        REQUIRE(selectRespondent(rs, cfg).has_value());
        CHECK(selectRespondent(rs, cfg)->index == 4);
    }
    SUBCASE("order of arrival does not matter") {
        std::vector<Respondent> rs = {{id(7), 0}, {id(4), 0}};
        CHECK(selectRespondent(rs, cfg)->index == 4);
    }
}

TEST_CASE("respondent selection: membership, minimality, purity") {
    RngStream rng(77);
    PolicyConfig cfg;
    for (int t = 0; t < 1000; ++t) {
        std::vector<Respondent> rs;
        size_t n = rng.index(6);
        for (size_t i = 0; i < n; ++i) {
            // Distinct ids: entries are keyed by sender in the protocol.
            uint32_t rid = static_cast<uint32_t>(7 * i + rng.index(7));
            rs.push_back(Respondent{AgentId{rid}, static_cast<int>(rng.index(4))});
        }
        auto pick = selectRespondent(rs, cfg);
        auto again = selectRespondent(rs, cfg);
        CHECK(pick == again);  // pure function of its inputs
        if (rs.empty()) {
            CHECK_FALSE(pick.has_value());
            continue;
        }
        REQUIRE(pick.has_value());
        int minCount = rs.front().childCount;
        for (const Respondent& r : rs) minCount = std::min(minCount, r.childCount);
        bool found = false;
        for (const Respondent& r : rs) {
            if (r.id == *pick) {
                found = true;
                CHECK(r.childCount == minCount);  // picked among the least loaded
            }
            if (r.childCount == minCount) {
                CHECK(pick->index <= r.id.index);  // lowest id among the minimal
            }
        }
        CHECK(found);
    }
}
