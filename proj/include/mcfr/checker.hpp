#pragma once

#include "mcfr/model.hpp"
#include "mcfr/query.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcfr {

struct ExploreLimits {
    std::size_t max_states = 5'000'000;
    std::optional<std::size_t> max_depth;
    std::optional<double> time_budget_seconds;
    // Worker threads for successor generation. Frontier expansion is
    // level-synchronized and merged in frontier order, so results do not
    // depend on this value.
    unsigned threads = 1;
};

struct ExploreStats {
    std::size_t states = 0;
    std::size_t edges = 0;
    std::size_t peak_frontier = 0;
    std::size_t depth = 0; // deepest BFS level reached
    double elapsed_seconds = 0.0;
};

struct Edge {
    std::uint32_t target = 0;
    TransitionRef via;
};

class TargetUnreachable : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Reachable states in breadth-first discovery order. State 0 is the initial
// state; parent links form a BFS tree rooted there.
class StateSpace {
public:
    StateSpace(const Model& model, std::shared_ptr<const StateCodec> codec);

    [[nodiscard]] const Model& model() const { return *model_; }
    [[nodiscard]] const StateCodec& codec() const { return *codec_; }

    [[nodiscard]] std::size_t size() const { return parent_.size(); }
    [[nodiscard]] std::string_view key(std::size_t index) const;
    [[nodiscard]] State state(std::size_t index) const;
    [[nodiscard]] std::optional<std::size_t> find(std::string_view key) const;
    [[nodiscard]] std::optional<std::size_t> find(const State& s) const;

    // Empty for states that were never expanded.
    [[nodiscard]] std::span<const Edge> successors(std::size_t index) const;
    [[nodiscard]] bool expanded(std::size_t index) const { return expanded_[index]; }
    // True when the state has no enabled transition at all.
    [[nodiscard]] bool deadlock(std::size_t index) const { return deadlock_[index]; }
    [[nodiscard]] std::optional<std::pair<std::size_t, TransitionRef>> parent(std::size_t index) const;
    [[nodiscard]] std::size_t depth(std::size_t index) const { return depth_[index]; }

    // True iff every reachable state was discovered and expanded.
    [[nodiscard]] bool complete() const { return complete_; }
    [[nodiscard]] const ExploreStats& stats() const { return stats_; }

private:
    friend class Explorer;

    std::pair<std::uint32_t, bool> insert(const char* key);
    void grow_table();

    const Model* model_;
    std::shared_ptr<const StateCodec> codec_;
    std::size_t key_size_;
    std::vector<char> keys_;
    std::vector<std::uint32_t> table_; // open addressing, 0 = empty, else index + 1
    std::vector<std::uint32_t> parent_;
    std::vector<TransitionRef> parent_via_;
    std::vector<std::uint32_t> depth_;
    std::vector<bool> expanded_;
    std::vector<bool> deadlock_;
    std::vector<std::size_t> edge_begin_;
    std::vector<std::size_t> edge_end_;
    std::vector<Edge> edges_;
    bool complete_ = false;
    ExploreStats stats_;
};

// Full breadth-first exploration within the limits.
[[nodiscard]] StateSpace explore(const Model& model, const ExploreLimits& limits = {});

struct TraceStep {
    TransitionRef via;
    std::string label;
    State state;
};

// initial --label1--> s1 --label2--> ... --> sn
struct Trace {
    State initial;
    std::vector<TraceStep> steps;
    // For infinite-path evidence: the final state repeats the state at this
    // position (0 = initial, i = after step i). Unset for finite traces.
    std::optional<std::size_t> loop_start;
    // The final state has no enabled transition.
    bool ends_in_deadlock = false;

    [[nodiscard]] const State& final_state() const { return steps.empty() ? initial : steps.back().state; }
    [[nodiscard]] std::size_t length() const { return steps.size(); }
};

// Shortest initial->target path through the parent links, re-validated step by
// step. Throws TargetUnreachable when the key is not in the space.
[[nodiscard]] Trace extract_witness(const StateSpace& space, std::string_view target_key);

// Replays the trace from the model's initial state; true iff every step is
// an enabled transition whose application yields the recorded state.
[[nodiscard]] bool replay(const Model& model, const Trace& trace);

// `Start → Year1 → ... → Graduated; time=8, totalCredits=128`
// Consecutive repeats of the same location vector are collapsed. The tail
// lists integer variables whose final value differs from the initial one.
[[nodiscard]] std::string render_trace(const Model& model, const Trace& trace);

enum class Outcome { yes, no, inconclusive };

[[nodiscard]] std::string_view outcome_name(Outcome o);

struct Verdict {
    Quantifier quantifier = Quantifier::exists_eventually;
    Outcome outcome = Outcome::inconclusive;
    // Witness for satisfied E<>/E[], counterexample for violated A[]/A<>.
    std::optional<Trace> evidence;
    ExploreStats stats;
    bool complete = false;

    [[nodiscard]] bool satisfied() const { return outcome == Outcome::yes; }
    [[nodiscard]] bool conclusive() const { return outcome != Outcome::inconclusive; }
};

[[nodiscard]] Verdict check(const Model& model, const BoundQuery& query, const ExploreLimits& limits = {});

struct VerdictJsonOptions {
    bool include_trace = true;
    bool include_timing = false; // elapsed time makes output non-reproducible
};

// `{satisfied, verdict, query, trace: [...], stats: {...}}`
[[nodiscard]] nlohmann::json verdict_to_json(const Model& model, const BoundQuery& query, const Verdict& v,
                                             const VerdictJsonOptions& options = {});

} // namespace mcfr
