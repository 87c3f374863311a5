#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "digca/rng.hpp"
#include "digca/types.hpp"

namespace digca {

struct DomainConfig {
    double lower = -50.0;
    double upper = 50.0;
    int sampleCount = 3;
};

// An agent's variable domain: continuous bounds plus the sampled candidate
// values the agent actually reasons over.
struct Domain {
    double lower = -50.0;
    double upper = 50.0;
    std::vector<double> samples;
};

Domain sampleDomain(RngStream& rng, const DomainConfig& cfg = DomainConfig{});

// Binary quadratic constraint f(x, y) = a x^2 + b x y + c y^2, where x is the
// value of the lower-indexed endpoint and y the higher-indexed one.
struct Coefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool operator==(const Coefficients&) const = default;
};

constexpr double kCoefficientLo = -5.0;
constexpr double kCoefficientHi = 5.0;

Coefficients sampleCoefficients(RngStream& rng);

double evalConstraint(const Coefficients& k, double x, double y);

// Unordered agent pair, normalized lo < hi.
struct PairKey {
    AgentId lo;
    AgentId hi;
    PairKey() = default;
    PairKey(AgentId a, AgentId b) : lo(a < b ? a : b), hi(a < b ? b : a) {}
    auto operator<=>(const PairKey&) const = default;
};

struct ConstraintEdge {
    PairKey key;
    Coefficients k;
};

class IncompleteAssignment : public std::runtime_error {
  public:
    explicit IncompleteAssignment(AgentId id)
        : std::runtime_error("no value assigned for agent " + std::to_string(id.index)) {}
};

// Sum of all edge costs under the given complete assignment. Throws
// IncompleteAssignment if an endpoint has no value. Summation order is the
// edge map order (ascending pair), so results are bitwise stable.
double globalCost(const std::map<PairKey, Coefficients>& edges,
                  const std::map<AgentId, double>& values);

enum class EventKind { AddAgent, RemoveAgent, ChangeConstraint };

// One environment event. RemoveAgent/ChangeConstraint payloads may be left
// unset, in which case the target is picked uniformly (event RNG stream) from
// the live agents / existing edges at application time.
struct EnvironmentEvent {
    double at = 0.0;
    EventKind kind = EventKind::AddAgent;
    std::optional<AgentId> agent;         // AddAgent: new id; RemoveAgent: victim
    std::optional<PairKey> edge;          // ChangeConstraint: explicit edge
    std::optional<Coefficients> coeffs;   // ChangeConstraint: explicit new coefficients
};

class ScriptError : public std::runtime_error {
  public:
    explicit ScriptError(const std::string& what) : std::runtime_error(what) {}
};

// Script file format, one event per line:
//   <time> add <id>
//   <time> remove <id|*>
//   <time> change <i> <j> [a b c]
//   <time> change *
// '#' starts a comment.
std::vector<EnvironmentEvent> parseScript(const std::string& text);
std::string formatScript(const std::vector<EnvironmentEvent>& events);

// Constraint/domain side of the environment. Hierarchy registers live in the
// agents; this owns what the problem definition owns: domains, quadratic
// coefficients per established parent-child pair, and values frozen at agent
// removal. Edge coefficients are derived per (pair, creation epoch) from the
// problem seed, so they do not depend on message interleavings.
class Environment {
  public:
    Environment() = default;
    Environment(uint64_t problemSeed, DomainConfig domainCfg)
        : problemSeed_(problemSeed), domainCfg_(domainCfg) {}

    const DomainConfig& domainConfig() const { return domainCfg_; }

    Domain spawnDomain(AgentId id);

    bool hasEdge(PairKey key) const { return edges_.count(key) != 0; }
    const Coefficients* edge(PairKey key) const;
    const std::map<PairKey, Coefficients>& edges() const { return edges_; }

    // Creates (or recreates) the edge for the pair, sampling fresh
    // coefficients for this creation epoch.
    Coefficients createEdge(PairKey key);
    void destroyEdge(PairKey key);
    void replaceCoefficients(PairKey key, Coefficients k);
    void clearEdges() { edges_.clear(); }

  private:
    uint64_t problemSeed_ = 0;
    DomainConfig domainCfg_;
    std::map<PairKey, Coefficients> edges_;
    std::map<PairKey, uint32_t> edgeEpoch_;
};

}  // namespace digca
