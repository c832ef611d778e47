#include "mcfr/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <sstream>
#include <thread>

namespace mcfr {

using nlohmann::json;

namespace {

ItemResult run_item(const Model& model, const QAItem& item, const Translator& translator, const FactBase& facts,
                    const ExploreLimits& limits)
{
    ItemResult r;
    r.id = item.id;
    r.category = item.category;
    r.groundtruth = item.groundtruth;
    // The record's own context wins over retrieval when it has one.
    FactBase local;
    const FactBase* fb = &facts;
    if (!item.context.empty()) {
        for (const auto& c : item.context)
            local.push_back({ {}, {}, {}, c });
        fb = &local;
    }
    const auto answer = ask(item.question, model, *fb, translator, limits, &item);
    r.predicted = answer.verdict;
    r.query_used = answer.query_used;
    r.source = answer.translation_source;
    r.reason = answer.verdict == Answer::uncertain ? answer.reason : std::string{};
    if (answer.check_result)
        r.states = answer.check_result->stats.states;
    return r;
}

std::string percent(double v)
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}

} // namespace

void tally(Report& report)
{
    report.per_category = {};
    report.overall = {};
    for (const auto& r : report.rows) {
        auto& s = report.per_category[static_cast<std::size_t>(r.category)];
        ++s.attempted;
        ++report.overall.attempted;
        if (r.correct()) {
            ++s.correct;
            ++report.overall.correct;
        }
    }
}

Report evaluate(const Model& model, std::vector<QAItem> items, const Translator& translator, const FactBase& facts,
                const ExploreLimits& limits, unsigned jobs, const ProgressFn& progress)
{
    std::stable_sort(items.begin(), items.end(),
                     [](const QAItem& a, const QAItem& b) { return natural_less(a.id, b.id); });

    Report report;
    report.model_name = model.name;
    report.strategy = std::string(strategy_name(translator.config().strategy));
    report.limits = limits;
    report.rows.resize(items.size());

    const auto workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(items.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < items.size(); ++i)
            report.rows[i] = run_item(model, items[i], translator, facts, limits);
    } else {
        std::atomic<std::size_t> next{ 0 };
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (auto i = next++; i < items.size(); i = next++)
                    report.rows[i] = run_item(model, items[i], translator, facts, limits);
            });
        }
        for (auto& t : pool)
            t.join();
    }
    if (progress)
        for (const auto& r : report.rows)
            progress(r);
    tally(report);
    return report;
}

json item_result_to_json(const ItemResult& r)
{
    json rec{ { "type", "item" },
              { "id", r.id },
              { "cat", category_name(r.category) },
              { "groundtruth", answer_name(r.groundtruth) },
              { "predicted", answer_name(r.predicted) },
              { "correct", r.correct() },
              { "query_used", r.query_used },
              { "source", r.source },
              { "states", r.states } };
    if (!r.reason.empty())
        rec["reason"] = r.reason;
    return rec;
}

json summary_to_json(const Report& report)
{
    const auto score = [](const Score& s) {
        return json{ { "attempted", s.attempted }, { "correct", s.correct }, { "accuracy", s.accuracy() } };
    };
    json cats = json::object();
    for (const auto c : all_categories)
        cats[std::string(category_name(c))] = score(report.score(c));
    json limits{ { "max_states", report.limits.max_states }, { "threads", report.limits.threads } };
    if (report.limits.max_depth)
        limits["max_depth"] = *report.limits.max_depth;
    return json{ { "type", "summary" },
                 { "model", report.model_name },
                 { "translator", report.strategy },
                 { "limits", limits },
                 { "categories", cats },
                 { "overall", score(report.overall) } };
}

std::string render_report(const Report& report, ReportFormat format)
{
    std::ostringstream out;
    if (format == ReportFormat::structured) {
        for (const auto& r : report.rows)
            out << item_result_to_json(r).dump() << '\n';
        out << summary_to_json(report).dump() << '\n';
        return out.str();
    }

    constexpr int label_w = 14;
    constexpr int col_w = 14;
    const auto header = [&] {
        out << std::left << std::setw(label_w) << "" << std::right;
        for (const auto c : all_categories)
            out << std::setw(col_w) << category_name(c);
        out << std::setw(col_w) << "Total" << '\n';
    };
    if (report.rows.empty()) {
        header();
        return out.str();
    }

    out << "model " << report.model_name << ", translator " << report.strategy << ", " << report.rows.size()
        << " item" << (report.rows.size() == 1 ? "" : "s") << "\n\n";
    std::size_t id_w = 2;
    for (const auto& r : report.rows)
        id_w = std::max(id_w, r.id.size());
    out << std::left << std::setw(static_cast<int>(id_w) + 2) << "id" << std::setw(14) << "category"
        << std::setw(7) << "truth" << std::setw(11) << "predicted" << std::setw(5) << "ok"
        << "query" << '\n';
    for (const auto& r : report.rows) {
        out << std::left << std::setw(static_cast<int>(id_w) + 2) << r.id << std::setw(14)
            << category_name(r.category) << std::setw(7) << answer_name(r.groundtruth) << std::setw(11)
            << answer_name(r.predicted) << std::setw(5) << (r.correct() ? "yes" : "NO")
            << (r.query_used.empty() ? "-" : r.query_used) << '\n';
    }
    out << '\n';

    header();
    const auto row = [&](std::string_view label, auto field) {
        out << std::left << std::setw(label_w) << label << std::right;
        for (const auto c : all_categories)
            out << std::setw(col_w) << field(report.score(c));
        out << std::setw(col_w) << field(report.overall) << '\n';
    };
    row("Attempted", [](const Score& s) { return std::to_string(s.attempted); });
    row("Correct", [](const Score& s) { return std::to_string(s.correct); });
    row("Accuracy (%)", [](const Score& s) { return percent(s.accuracy()); });
    return out.str();
}

} // namespace mcfr
