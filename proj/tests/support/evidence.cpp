#include "evidence.hpp"

#include <algorithm>
#include <limits>

namespace mcfr::oracle {

std::string evidence_problem(const Model& m, const Graph& g, const BoundQuery& q, const Verdict& v)
{
    const bool want = holds(g, q);
    const bool universal = q.quantifier() == Quantifier::forall_always || q.quantifier() == Quantifier::forall_eventually;
    const bool needs_evidence = universal ? !want : want;
    if (!v.conclusive())
        return "verdict is inconclusive";
    if (v.satisfied() != want)
        return "verdict disagrees with the oracle";
    if (!needs_evidence)
        return v.evidence ? "unexpected evidence" : "";
    if (!v.evidence)
        return "missing evidence";

    const Trace& t = *v.evidence;
    if (!replay(m, t))
        return "library replay rejects the trace";
    std::vector<OState> path{ from_state(t.initial) };
    if (path[0] != g.states[0])
        return "trace does not start in the initial state";
    for (const auto& step : t.steps) {
        const auto next = from_state(step.state);
        if (!is_step(m, path.back(), next))
            return "step " + std::to_string(path.size()) + " is not a transition";
        path.push_back(next);
    }

    // The state predicate the evidence must exhibit.
    const bool target = !universal;
    const auto sat = [&](const OState& s) { return (eval(q.predicate(), s) != 0) == target; };

    switch (q.quantifier()) {
    case Quantifier::exists_eventually:
    case Quantifier::forall_always: {
        if (!sat(path.back()))
            return "final state does not decide the query";
        const auto d = distances(g);
        auto best = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < g.states.size(); ++i)
            if (sat(g.states[i]))
                best = std::min(best, d[i]);
        if (t.length() != best)
            return "trace has length " + std::to_string(t.length()) + ", shortest is " + std::to_string(best);
        return "";
    }
    case Quantifier::exists_always:
    case Quantifier::forall_eventually: {
        if (!std::all_of(path.begin(), path.end(), sat))
            return "a state on the path breaks the invariant";
        if (t.loop_start) {
            if (*t.loop_start >= path.size() - 1)
                return "loop start is not an earlier position";
            if (path[*t.loop_start] != path.back())
                return "lasso does not close";
            return "";
        }
        if (!t.ends_in_deadlock)
            return "finite path without a deadlock";
        if (!successors(m, path.back()).empty())
            return "final state is not a deadlock";
        return "";
    }
    }
    return "unknown quantifier";
}

} // namespace mcfr::oracle
