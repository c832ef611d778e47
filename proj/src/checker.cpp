#include "mcfr/checker.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstring>
#include <exception>
#include <functional>
#include <thread>
#include <unordered_map>

namespace mcfr {

// ---------------------------------------------------------------------------
// StateSpace

StateSpace::StateSpace(const Model& model, std::shared_ptr<const StateCodec> codec)
    : model_{ &model }, codec_{ std::move(codec) }, key_size_{ codec_->key_size() }
{
    table_.assign(1024, 0);
}

std::string_view StateSpace::key(std::size_t index) const
{
    return { keys_.data() + index * key_size_, key_size_ };
}

State StateSpace::state(std::size_t index) const
{
    return codec_->decode(key(index));
}

namespace {

std::size_t hash_key(std::string_view k)
{
    return std::hash<std::string_view>{}(k);
}

} // namespace

std::optional<std::size_t> StateSpace::find(std::string_view k) const
{
    if (k.size() != key_size_)
        return std::nullopt;
    const std::size_t mask = table_.size() - 1;
    for (std::size_t slot = hash_key(k) & mask;; slot = (slot + 1) & mask) {
        const auto entry = table_[slot];
        if (entry == 0)
            return std::nullopt;
        if (key(entry - 1) == k)
            return entry - 1;
    }
}

std::optional<std::size_t> StateSpace::find(const State& s) const
{
    return find(codec_->encode(s));
}

std::span<const Edge> StateSpace::successors(std::size_t index) const
{
    if (!expanded_[index])
        return {};
    return { edges_.data() + edge_begin_[index], edge_end_[index] - edge_begin_[index] };
}

std::optional<std::pair<std::size_t, TransitionRef>> StateSpace::parent(std::size_t index) const
{
    if (index == 0)
        return std::nullopt;
    return std::pair<std::size_t, TransitionRef>{ parent_[index], parent_via_[index] };
}

void StateSpace::grow_table()
{
    std::vector<std::uint32_t> next(table_.size() * 2, 0);
    const std::size_t mask = next.size() - 1;
    for (std::size_t i = 0; i < size(); ++i) {
        std::size_t slot = hash_key(key(i)) & mask;
        while (next[slot] != 0)
            slot = (slot + 1) & mask;
        next[slot] = static_cast<std::uint32_t>(i + 1);
    }
    table_ = std::move(next);
}

// Returns (index, inserted). Caller fills the per-state arrays.
std::pair<std::uint32_t, bool> StateSpace::insert(const char* k)
{
    const std::string_view kv{ k, key_size_ };
    const std::size_t mask = table_.size() - 1;
    std::size_t slot = hash_key(kv) & mask;
    for (;; slot = (slot + 1) & mask) {
        const auto entry = table_[slot];
        if (entry == 0)
            break;
        if (key(entry - 1) == kv)
            return { entry - 1, false };
    }
    const auto index = static_cast<std::uint32_t>(size());
    keys_.insert(keys_.end(), k, k + key_size_);
    table_[slot] = index + 1;
    parent_.push_back(0);
    parent_via_.push_back({});
    depth_.push_back(0);
    expanded_.push_back(false);
    deadlock_.push_back(false);
    edge_begin_.push_back(0);
    edge_end_.push_back(0);
    if ((size() + 1) * 2 > table_.size())
        grow_table();
    return { index, true };
}

// ---------------------------------------------------------------------------
// Explorer

struct SearchOptions {
    // Stop as soon as a discovered state satisfies this predicate.
    const Expr* stop_when = nullptr;
    // Only states satisfying this predicate are admitted.
    const Expr* restrict_to = nullptr;
    bool record_edges = true;
};

class Explorer {
public:
    Explorer(const Model& model, const ExploreLimits& limits, SearchOptions options)
        : model_{ model }, limits_{ limits }, options_{ options },
          codec_{ std::make_shared<const StateCodec>(model) }
    {
    }

    StateSpace run();

    [[nodiscard]] std::optional<std::uint32_t> hit() const { return hit_; }

private:
    enum : std::uint8_t { admitted = 1, stops = 2 };

    struct Batch {
        std::vector<char> keys;
        std::vector<TransitionRef> vias;
        std::vector<std::uint8_t> flags;
        std::vector<std::size_t> offsets; // per source state, size n + 1
        std::vector<std::uint32_t> enabled;
        std::exception_ptr error;
        std::size_t error_at = 0; // source position of the failure
    };

    void expand(const StateSpace& space, std::size_t first, std::size_t last, Batch& out) const;
    [[nodiscard]] bool out_of_time() const;

    const Model& model_;
    const ExploreLimits& limits_;
    SearchOptions options_;
    std::shared_ptr<const StateCodec> codec_;
    std::optional<std::uint32_t> hit_;
    std::chrono::steady_clock::time_point started_;
};

bool Explorer::out_of_time() const
{
    if (!limits_.time_budget_seconds)
        return false;
    const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - started_;
    return spent.count() > *limits_.time_budget_seconds;
}

void Explorer::expand(const StateSpace& space, std::size_t first, std::size_t last, Batch& out) const
{
    const std::size_t ks = codec_->key_size();
    out.offsets.push_back(0);
    for (std::size_t i = first; i < last; ++i) {
        try {
            const State s = codec_->decode(space.key(i));
            const auto enabled = enabled_transitions(model_, s);
            out.enabled.push_back(static_cast<std::uint32_t>(enabled.size()));
            for (const auto& t : enabled) {
                const State next = apply_transition(model_, s, t);
                std::uint8_t f = 0;
                if (!options_.restrict_to || holds(*options_.restrict_to, next))
                    f |= admitted;
                if (options_.stop_when && holds(*options_.stop_when, next))
                    f |= stops;
                const auto at = out.keys.size();
                out.keys.resize(at + ks);
                codec_->encode(next, out.keys.data() + at);
                out.vias.push_back(t);
                out.flags.push_back(f);
            }
        } catch (...) {
            out.error = std::current_exception();
            out.error_at = i;
            return;
        }
        out.offsets.push_back(out.vias.size());
    }
}

StateSpace Explorer::run()
{
    started_ = std::chrono::steady_clock::now();
    StateSpace space(model_, codec_);
    const std::size_t ks = codec_->key_size();
    std::size_t edge_count = 0; // also counted when edges are not recorded

    const auto finish = [&](bool exhausted) {
        space.complete_ = exhausted;
        space.stats_.states = space.size();
        space.stats_.edges = edge_count;
        space.stats_.elapsed_seconds
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
        return std::move(space);
    };

    const State init = initial_state(model_);
    if (options_.restrict_to && !holds(*options_.restrict_to, init))
        return finish(true);
    {
        const std::string k = codec_->encode(init);
        space.insert(k.data());
    }
    space.stats_.peak_frontier = 1;
    if (options_.stop_when && holds(*options_.stop_when, init)) {
        hit_ = 0;
        return finish(false);
    }

    const unsigned threads = std::max(1u, limits_.threads);
    const std::size_t per_worker = 2048;
    std::size_t level_begin = 0;
    std::size_t level_end = 1;
    std::size_t depth = 0;

    while (level_begin < level_end) {
        space.stats_.peak_frontier = std::max(space.stats_.peak_frontier, level_end - level_begin);
        space.stats_.depth = depth;

        if (limits_.max_depth && depth >= *limits_.max_depth) {
            // States at the depth limit stay unexpanded; exploration is only
            // complete if none of them can move.
            bool frontier_moves = false;
            for (std::size_t i = level_begin; i < level_end && !frontier_moves; ++i)
                frontier_moves = !enabled_transitions(model_, space.state(i)).empty();
            return finish(!frontier_moves);
        }

        for (std::size_t chunk = level_begin; chunk < level_end; chunk += per_worker * threads) {
            if (out_of_time())
                return finish(false);

            const std::size_t chunk_end = std::min(level_end, chunk + per_worker * threads);
            const std::size_t workers
                = std::min<std::size_t>(threads, (chunk_end - chunk + per_worker - 1) / per_worker);
            std::vector<Batch> batches(workers);
            const std::size_t share = (chunk_end - chunk + workers - 1) / workers;
            if (workers == 1) {
                expand(space, chunk, chunk_end, batches[0]);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(workers);
                for (std::size_t w = 0; w < workers; ++w) {
                    const std::size_t first = chunk + w * share;
                    const std::size_t last = std::min(chunk_end, first + share);
                    pool.emplace_back([this, &space, first, last, &out = batches[w]] {
                        expand(space, first, last, out);
                    });
                }
                for (auto& t : pool)
                    t.join();
            }

            // Sequential merge in frontier order keeps discovery order (and
            // therefore witnesses) independent of the worker count.
            std::size_t source = chunk;
            for (auto& b : batches) {
                for (std::size_t j = 0; j + 1 < b.offsets.size(); ++j, ++source) {
                    space.edge_begin_[source] = space.edges_.size();
                    space.deadlock_[source] = b.enabled[j] == 0;
                    for (std::size_t e = b.offsets[j]; e < b.offsets[j + 1]; ++e) {
                        if (!(b.flags[e] & admitted))
                            continue;
                        const char* k = b.keys.data() + e * ks;
                        if (space.size() >= limits_.max_states && !space.find(std::string_view{ k, ks }))
                            return finish(false);
                        const auto [index, inserted] = space.insert(k);
                        if (inserted) {
                            space.parent_[index] = static_cast<std::uint32_t>(source);
                            space.parent_via_[index] = b.vias[e];
                            space.depth_[index] = static_cast<std::uint32_t>(depth + 1);
                        }
                        ++edge_count;
                        if (options_.record_edges)
                            space.edges_.push_back({ index, b.vias[e] });
                        if (inserted && (b.flags[e] & stops)) {
                            hit_ = index;
                            return finish(false);
                        }
                    }
                    space.edge_end_[source] = space.edges_.size();
                    space.expanded_[source] = true;
                }
                if (b.error) {
                    assert(b.error_at == source);
                    std::rethrow_exception(b.error);
                }
            }
        }
        level_begin = level_end;
        level_end = space.size();
        ++depth;
    }
    space.stats_.depth = depth == 0 ? 0 : depth - 1;
    return finish(true);
}

StateSpace explore(const Model& model, const ExploreLimits& limits)
{
    return Explorer(model, limits, {}).run();
}

// ---------------------------------------------------------------------------
// Traces

Trace extract_witness(const StateSpace& space, std::string_view target_key)
{
    const auto target = space.find(target_key);
    if (!target)
        throw TargetUnreachable("target state is not part of the explored state space");

    std::vector<std::size_t> chain{ *target };
    while (const auto p = space.parent(chain.back()))
        chain.push_back(p->first);
    std::reverse(chain.begin(), chain.end());

    const Model& model = space.model();
    Trace trace;
    trace.initial = space.state(chain.front());
    State current = trace.initial;
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const auto via = space.parent(chain[i])->second;
        State next = apply_transition(model, current, via);
        if (!(next == space.state(chain[i])))
            throw std::logic_error("witness step does not replay under the model semantics");
        trace.steps.push_back({ via, transition_at(model, via).label, next });
        current = std::move(next);
    }
    return trace;
}

bool replay(const Model& model, const Trace& trace)
{
    State current = initial_state(model);
    if (!(current == trace.initial))
        return false;
    for (const auto& step : trace.steps) {
        const auto enabled = enabled_transitions(model, current);
        if (std::find(enabled.begin(), enabled.end(), step.via) == enabled.end())
            return false;
        State next = apply_transition(model, current, step.via);
        if (!(next == step.state))
            return false;
        current = std::move(next);
    }
    if (trace.loop_start) {
        const auto at = *trace.loop_start;
        if (at >= trace.steps.size())
            return false;
        const State& repeated = at == 0 ? trace.initial : trace.steps[at - 1].state;
        if (!(repeated == trace.final_state()))
            return false;
    }
    if (trace.ends_in_deadlock && !enabled_transitions(model, current).empty())
        return false;
    return true;
}

namespace {

std::string locations_of(const Model& model, const State& s)
{
    if (model.processes.size() == 1)
        return model.processes[0].locations[static_cast<std::size_t>(s.locs[0])];
    std::string out = "(";
    for (std::size_t p = 0; p < model.processes.size(); ++p) {
        if (p)
            out += ", ";
        out += model.processes[p].name + "." + model.processes[p].locations[static_cast<std::size_t>(s.locs[p])];
    }
    return out + ")";
}

} // namespace

std::string render_trace(const Model& model, const Trace& trace)
{
    std::string out = locations_of(model, trace.initial);
    std::vector<std::int32_t> last = trace.initial.locs;
    for (const auto& step : trace.steps) {
        if (step.state.locs == last)
            continue;
        last = step.state.locs;
        out += " → " + locations_of(model, step.state);
    }
    const State& fin = trace.final_state();
    std::string tail;
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        if (model.vars[i].type != Type::integer || fin.values[i] == trace.initial.values[i])
            continue;
        if (!tail.empty())
            tail += ", ";
        tail += model.vars[i].name + "=" + std::to_string(fin.values[i]);
    }
    if (!tail.empty())
        out += "; " + tail;
    if (trace.loop_start)
        out += " (cycles back to step " + std::to_string(*trace.loop_start) + ")";
    else if (trace.ends_in_deadlock)
        out += " (deadlock)";
    return out;
}

// ---------------------------------------------------------------------------
// check

std::string_view outcome_name(Outcome o)
{
    switch (o) {
    case Outcome::yes:
        return "yes";
    case Outcome::no:
        return "no";
    case Outcome::inconclusive:
        return "inconclusive";
    }
    return "?";
}

namespace {

struct Reachability {
    Outcome found = Outcome::inconclusive; // yes = a state satisfying the target exists
    std::optional<Trace> trace;
    ExploreStats stats;
    bool complete = false;
};

Reachability find_state(const Model& model, const Expr& target, const ExploreLimits& limits)
{
    Explorer ex(model, limits, SearchOptions{ &target, nullptr, false });
    const StateSpace space = ex.run();
    Reachability r{ Outcome::inconclusive, std::nullopt, space.stats(), space.complete() };
    if (const auto hit = ex.hit()) {
        r.found = Outcome::yes;
        r.trace = extract_witness(space, space.key(*hit));
    } else if (space.complete()) {
        r.found = Outcome::no;
    }
    return r;
}

// Greatest fixpoint over the phi-restricted graph: a state qualifies if it
// satisfies phi and is a deadlock or has a qualifying successor. Unexpanded
// (truncated) states count as qualifying iff `optimistic`.
std::vector<bool> globally_fixpoint(const StateSpace& space, bool optimistic)
{
    const std::size_t n = space.size();
    std::vector<bool> alive(n);
    std::vector<std::uint32_t> support(n, 0);
    std::vector<std::vector<std::uint32_t>> preds(n);
    for (std::size_t i = 0; i < n; ++i) {
        alive[i] = space.expanded(i) || optimistic;
        for (const auto& e : space.successors(i))
            preds[e.target].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : space.successors(i))
            if (alive[e.target])
                ++support[i];

    std::vector<std::size_t> work;
    for (std::size_t i = 0; i < n; ++i)
        if (space.expanded(i) && !space.deadlock(i) && support[i] == 0) {
            alive[i] = false;
            work.push_back(i);
        }
    while (!work.empty()) {
        const auto j = work.back();
        work.pop_back();
        for (const auto i : preds[j]) {
            if (!alive[i] || !space.expanded(i))
                continue;
            if (--support[i] == 0 && !space.deadlock(i)) {
                alive[i] = false;
                work.push_back(i);
            }
        }
    }
    return alive;
}

// Walks qualifying states from the initial state until a deadlock or a
// repeated state (lasso).
Trace globally_witness(const StateSpace& space, const std::vector<bool>& alive)
{
    const Model& model = space.model();
    Trace trace;
    trace.initial = space.state(0);
    std::unordered_map<std::size_t, std::size_t> position{ { 0, 0 } };
    std::size_t current = 0;
    State current_state = trace.initial;
    for (;;) {
        if (space.deadlock(current)) {
            trace.ends_in_deadlock = true;
            return trace;
        }
        const auto succ = space.successors(current);
        const auto next = std::find_if(succ.begin(), succ.end(), [&](const Edge& e) { return alive[e.target]; });
        assert(next != succ.end());
        State s = apply_transition(model, current_state, next->via);
        trace.steps.push_back({ next->via, transition_at(model, next->via).label, s });
        current_state = std::move(s);
        current = next->target;
        if (const auto seen = position.find(current); seen != position.end()) {
            trace.loop_start = seen->second;
            return trace;
        }
        position.emplace(current, trace.steps.size());
    }
}

Reachability find_globally(const Model& model, const Expr& phi, const ExploreLimits& limits)
{
    Explorer ex(model, limits, SearchOptions{ nullptr, &phi, true });
    const StateSpace space = ex.run();
    Reachability r{ Outcome::inconclusive, std::nullopt, space.stats(), space.complete() };
    if (space.size() == 0) {
        r.found = Outcome::no; // initial state violates phi
        return r;
    }
    const auto certain = globally_fixpoint(space, false);
    if (certain[0]) {
        r.found = Outcome::yes;
        r.trace = globally_witness(space, certain);
        return r;
    }
    if (space.complete() || !globally_fixpoint(space, true)[0])
        r.found = Outcome::no;
    return r;
}

Expr negate(const Expr& e)
{
    return Expr::unary(Op::logical_not, e);
}

Outcome flip(Outcome o)
{
    switch (o) {
    case Outcome::yes:
        return Outcome::no;
    case Outcome::no:
        return Outcome::yes;
    default:
        return o;
    }
}

} // namespace

Verdict check(const Model& model, const BoundQuery& query, const ExploreLimits& limits)
{
    Verdict v;
    v.quantifier = query.quantifier();
    const Expr& phi = query.predicate();

    Reachability r;
    bool dual = false;
    switch (query.quantifier()) {
    case Quantifier::exists_eventually:
        r = find_state(model, phi, limits);
        break;
    case Quantifier::forall_always:
        r = find_state(model, negate(phi), limits);
        dual = true;
        break;
    case Quantifier::exists_always:
        r = find_globally(model, phi, limits);
        break;
    case Quantifier::forall_eventually:
        r = find_globally(model, negate(phi), limits);
        dual = true;
        break;
    }
    v.outcome = dual ? flip(r.found) : r.found;
    v.evidence = std::move(r.trace);
    v.stats = r.stats;
    v.complete = r.complete;
    return v;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json state_json(const Model& model, const State& s)
{
    nlohmann::json locs = nlohmann::json::object();
    for (std::size_t p = 0; p < model.processes.size(); ++p)
        locs[model.processes[p].name] = model.processes[p].locations[static_cast<std::size_t>(s.locs[p])];
    nlohmann::json vals = nlohmann::json::object();
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        if (model.vars[i].type == Type::boolean)
            vals[model.vars[i].name] = s.values[i] != 0;
        else
            vals[model.vars[i].name] = s.values[i];
    }
    return { { "locations", std::move(locs) }, { "values", std::move(vals) } };
}

} // namespace

nlohmann::json verdict_to_json(const Model& model, const BoundQuery& query, const Verdict& v,
                               const VerdictJsonOptions& options)
{
    nlohmann::json j;
    j["query"] = to_string(query);
    j["satisfied"] = v.satisfied();
    j["verdict"] = std::string(outcome_name(v.outcome));
    j["complete"] = v.complete;

    nlohmann::json trace = nlohmann::json::array();
    if (v.evidence) {
        nlohmann::json first = state_json(model, v.evidence->initial);
        first["step"] = 0;
        trace.push_back(std::move(first));
        std::size_t n = 0;
        for (const auto& step : v.evidence->steps) {
            nlohmann::json entry = state_json(model, step.state);
            entry["step"] = ++n;
            entry["label"] = step.label;
            entry["process"] = model.processes[step.via.process].name;
            trace.push_back(std::move(entry));
        }
    }
    if (options.include_trace)
        j["trace"] = std::move(trace);
    if (v.evidence) {
        j["trace_text"] = render_trace(model, *v.evidence);
        j["evidence"] = (v.quantifier == Quantifier::exists_eventually || v.quantifier == Quantifier::exists_always)
                            ? "witness"
                            : "counterexample";
        if (v.evidence->loop_start)
            j["loop_start"] = *v.evidence->loop_start;
        if (v.evidence->ends_in_deadlock)
            j["ends_in_deadlock"] = true;
    }

    nlohmann::json stats{ { "states", v.stats.states },
                          { "edges", v.stats.edges },
                          { "peak_frontier", v.stats.peak_frontier },
                          { "depth", v.stats.depth } };
    if (options.include_timing)
        stats["elapsed_ms"] = v.stats.elapsed_seconds * 1000.0;
    j["stats"] = std::move(stats);
    return j;
}

} // namespace mcfr
