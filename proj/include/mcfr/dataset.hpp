#pragma once

#include "mcfr/binder.hpp"
#include "mcfr/diagnostic.hpp"
#include "mcfr/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcfr {

enum class Category { safety, liveness, reachability, fairness };

inline constexpr Category all_categories[] = { Category::safety, Category::liveness, Category::reachability,
                                               Category::fairness };

[[nodiscard]] std::string_view category_name(Category c); // "Safety", ...
[[nodiscard]] std::optional<Category> parse_category(std::string_view text);

enum class Answer { yes, no, uncertain };

[[nodiscard]] std::string_view answer_name(Answer a); // "Yes", "No", "Uncertain"
[[nodiscard]] std::optional<Answer> parse_answer(std::string_view text);

// One benchmark record. Field names on disk: q, cat, context, spec,
// formal_spec, groundtruth, id.
struct QAItem {
    std::string id;
    std::string question;
    Category category = Category::safety;
    std::vector<std::string> context;
    std::string spec;        // informal CTL text, not checked
    std::string formal_spec; // query-language text, validated at load
    Answer groundtruth = Answer::no;
};

// `{"enroll_request": "CourseX_Reg", ...}`
[[nodiscard]] Result<AliasMap> parse_aliases(const nlohmann::json& doc);
[[nodiscard]] Result<AliasMap> load_aliases(const std::string& path);

// Validates every record against `model`. All-or-nothing: any error yields
// no items and the full diagnostic list. Items without an id get `item<N>`
// (1-based position). The result is ordered by natural id order.
[[nodiscard]] Result<std::vector<QAItem>> parse_dataset(const nlohmann::json& doc, const Model& model,
                                                        const AliasMap& aliases = {});
[[nodiscard]] Result<std::vector<QAItem>> load_dataset(const std::string& path, const Model& model,
                                                       const AliasMap& aliases = {});

[[nodiscard]] nlohmann::json item_to_json(const QAItem& item);

// "Q2" < "Q10"; digit runs compare numerically.
[[nodiscard]] bool natural_less(std::string_view a, std::string_view b);

} // namespace mcfr
