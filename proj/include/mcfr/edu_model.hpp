#pragma once

#include "mcfr/binder.hpp"
#include "mcfr/dataset.hpp"
#include "mcfr/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mcfr {

// Policy constants baked into assets/student_lifecycle.mcm. The model file is
// the source of truth for checking; these mirror it and a unit test keeps
// the two in sync.
struct EduPolicy {
    static constexpr int credits_per_graduation = 128;
    static constexpr int semester_credit_choices[] = { 12, 16 };
    static constexpr int year2_credits = 28;
    static constexpr int year3_credits = 56;
    static constexpr int year4_credits = 96;
    static constexpr int internship_credits = 84; // ceil(0.65 * 128)
    static constexpr int max_semesters = 16;
};

static_assert(0 < EduPolicy::year2_credits && EduPolicy::year2_credits < EduPolicy::year3_credits
              && EduPolicy::year3_credits < EduPolicy::year4_credits
              && EduPolicy::year4_credits <= EduPolicy::credits_per_graduation);
static_assert(EduPolicy::internship_credits * 100 >= 65 * EduPolicy::credits_per_graduation
              && (EduPolicy::internship_credits - 1) * 100 < 65 * EduPolicy::credits_per_graduation);

struct Fact {
    std::string subject;
    std::string predicate;
    std::string object;
    std::string display; // `prerequisite(CourseX, CourseY)`
};

using FactBase = std::vector<Fact>;

// Directory holding the bundled data files. Looked up in order: the
// MCFR_ASSET_DIR environment variable, `<exe dir>/../share/mcfr/assets`,
// then the source tree the library was built from.
[[nodiscard]] std::filesystem::path asset_dir();
[[nodiscard]] std::string asset_path(std::string_view file);

// `[{"s": ..., "p": ..., "o": ..., "display": ...}, ...]`
[[nodiscard]] Result<FactBase> load_facts(const std::string& path);

// Bundled assets. These throw std::runtime_error if a bundled file is missing
// or invalid, which only happens with a broken installation.
[[nodiscard]] Model build_edu_model();
[[nodiscard]] FactBase edu_facts();
[[nodiscard]] AliasMap edu_aliases();
[[nodiscard]] std::vector<QAItem> edu_mini_dataset();

} // namespace mcfr
