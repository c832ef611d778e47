#pragma once

#include "mcfr/checker.hpp"
#include "mcfr/dataset.hpp"
#include "mcfr/qa.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcfr {

struct ItemResult {
    std::string id;
    Category category = Category::safety;
    Answer groundtruth = Answer::no;
    Answer predicted = Answer::uncertain;
    std::string query_used;
    std::string source; // translation source, e.g. "formal_spec"
    std::string reason; // non-empty for Uncertain rows
    std::size_t states = 0;

    [[nodiscard]] bool correct() const { return predicted == groundtruth; }
};

struct Score {
    std::size_t attempted = 0;
    std::size_t correct = 0;

    // Percentage; 0 when nothing was attempted.
    [[nodiscard]] double accuracy() const
    {
        return attempted == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(attempted);
    }
    friend bool operator==(const Score&, const Score&) = default;
};

struct Report {
    std::string model_name;
    std::string strategy;
    ExploreLimits limits;
    std::vector<ItemResult> rows; // natural id order
    std::array<Score, 4> per_category{}; // indexed by Category
    Score overall;

    [[nodiscard]] const Score& score(Category c) const { return per_category[static_cast<std::size_t>(c)]; }
};

// Recomputes the per-category and overall scores from the rows.
void tally(Report& report);

using ProgressFn = std::function<void(const ItemResult&)>;

// Uncertain predictions count as incorrect. Items run on up to `jobs`
// threads; rows and scores do not depend on the thread count or on the input
// order. `progress` is called once per item, in id order, after all items
// finish.
[[nodiscard]] Report evaluate(const Model& model, std::vector<QAItem> items, const Translator& translator,
                              const FactBase& facts, const ExploreLimits& limits = {}, unsigned jobs = 1,
                              const ProgressFn& progress = {});

enum class ReportFormat { table_text, structured };

[[nodiscard]] nlohmann::json item_result_to_json(const ItemResult& r);
[[nodiscard]] nlohmann::json summary_to_json(const Report& report);

// table_text: per-item lines then a Safety/Liveness/Reachability/Fairness/
// Total table. structured: one JSON record per item followed by a summary
// record, newline-delimited.
[[nodiscard]] std::string render_report(const Report& report, ReportFormat format);

} // namespace mcfr
