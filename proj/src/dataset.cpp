#include "mcfr/dataset.hpp"

#include "mcfr/query.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mcfr {

using nlohmann::json;

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// The published record wraps formal_spec in a LaTeX \texttt{...}; accept it.
std::string strip_texttt(std::string s)
{
    constexpr std::string_view prefix = "\\texttt{";
    if (s.starts_with(prefix) && s.ends_with('}'))
        s = s.substr(prefix.size(), s.size() - prefix.size() - 1);
    return s;
}

Result<json> read_json(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::vector<Diagnostic>{ make_error(codes::io, "cannot open '" + path + "'") };
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        return std::vector<Diagnostic>{ make_error(codes::syntax, "'" + path + "' is not valid JSON: " + e.what()) };
    }
}

} // namespace

std::string_view category_name(Category c)
{
    switch (c) {
    case Category::safety:
        return "Safety";
    case Category::liveness:
        return "Liveness";
    case Category::reachability:
        return "Reachability";
    case Category::fairness:
        return "Fairness";
    }
    return "?";
}

std::optional<Category> parse_category(std::string_view text)
{
    const auto l = lower(text);
    for (const auto c : all_categories)
        if (lower(category_name(c)) == l)
            return c;
    return std::nullopt;
}

std::string_view answer_name(Answer a)
{
    switch (a) {
    case Answer::yes:
        return "Yes";
    case Answer::no:
        return "No";
    case Answer::uncertain:
        return "Uncertain";
    }
    return "?";
}

std::optional<Answer> parse_answer(std::string_view text)
{
    const auto l = lower(text);
    if (l == "yes")
        return Answer::yes;
    if (l == "no")
        return Answer::no;
    if (l == "uncertain")
        return Answer::uncertain;
    return std::nullopt;
}

bool natural_less(std::string_view a, std::string_view b)
{
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            auto ie = i;
            auto je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie])))
                ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je])))
                ++je;
            auto x = a.substr(i, ie - i);
            auto y = b.substr(j, je - j);
            while (x.size() > 1 && x.front() == '0')
                x.remove_prefix(1);
            while (y.size() > 1 && y.front() == '0')
                y.remove_prefix(1);
            if (x.size() != y.size())
                return x.size() < y.size();
            if (x != y)
                return x < y;
            i = ie;
            j = je;
            continue;
        }
        if (a[i] != b[j])
            return a[i] < b[j];
        ++i;
        ++j;
    }
    return a.size() - i < b.size() - j;
}

Result<AliasMap> parse_aliases(const json& doc)
{
    if (!doc.is_object())
        return std::vector<Diagnostic>{ make_error(codes::syntax, "alias file must be a JSON object") };
    AliasMap out;
    std::vector<Diagnostic> diags;
    for (const auto& [k, v] : doc.items()) {
        if (!v.is_string()) {
            diags.push_back(make_error(codes::bad_value, "alias '" + k + "' must map to a string"));
            continue;
        }
        out.emplace(k, v.get<std::string>());
    }
    if (!diags.empty())
        return diags;
    return out;
}

Result<AliasMap> load_aliases(const std::string& path)
{
    auto doc = read_json(path);
    if (!doc)
        return doc.diagnostics();
    return parse_aliases(doc.value());
}

Result<std::vector<QAItem>> parse_dataset(const json& doc, const Model& model, const AliasMap& aliases)
{
    if (!doc.is_array())
        return std::vector<Diagnostic>{ make_error(codes::syntax, "dataset must be a JSON array of items") };

    std::vector<QAItem> items;
    std::vector<Diagnostic> diags;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        QAItem item;
        item.id = "item" + std::to_string(i + 1);
        if (!rec.is_object()) {
            diags.push_back(make_error(codes::syntax, "item '" + item.id + "': not a JSON object"));
            continue;
        }
        if (const auto it = rec.find("id"); it != rec.end()) {
            if (it->is_string())
                item.id = it->get<std::string>();
            else if (it->is_number_integer())
                item.id = std::to_string(it->get<long long>());
        }
        const auto where = "item '" + item.id + "': ";
        const auto text_field = [&](const char* name, bool required) -> std::optional<std::string> {
            const auto it = rec.find(name);
            if (it == rec.end() || it->is_null()) {
                if (required)
                    diags.push_back(make_error(codes::missing_field, where + "missing field '" + name + "'"));
                return std::nullopt;
            }
            if (!it->is_string()) {
                diags.push_back(make_error(codes::bad_value, where + "field '" + name + "' must be a string"));
                return std::nullopt;
            }
            return it->get<std::string>();
        };

        const auto q = text_field("q", true);
        const auto cat = text_field("cat", true);
        const auto formal = text_field("formal_spec", true);
        const auto truth = text_field("groundtruth", true);
        const auto spec = text_field("spec", false);
        if (q)
            item.question = *q;
        if (spec)
            item.spec = *spec;
        if (cat) {
            if (const auto c = parse_category(*cat))
                item.category = *c;
            else
                diags.push_back(make_error(codes::bad_category, where + "unknown category '" + *cat
                                                                    + "' (expected Safety, Liveness, "
                                                                      "Reachability or Fairness)"));
        }
        if (truth) {
            const auto a = parse_answer(*truth);
            if (a && *a != Answer::uncertain)
                item.groundtruth = *a;
            else
                diags.push_back(make_error(codes::bad_value, where + "groundtruth must be Yes or No, got '" + *truth + "'"));
        }
        if (const auto it = rec.find("context"); it != rec.end() && !it->is_null()) {
            bool ok = it->is_array();
            if (ok) {
                for (const auto& c : *it) {
                    if (!c.is_string()) {
                        ok = false;
                        break;
                    }
                    item.context.push_back(c.get<std::string>());
                }
            }
            if (!ok)
                diags.push_back(make_error(codes::bad_value, where + "context must be an array of strings"));
        }
        if (formal) {
            item.formal_spec = strip_texttt(*formal);
            const auto bound = compile_query(item.formal_spec, model, aliases);
            if (!bound) {
                for (const auto& d : bound.diagnostics()) {
                    auto wrapped = d;
                    wrapped.code = std::string(codes::spec_parse);
                    wrapped.message = where + "formal_spec '" + item.formal_spec + "': " + d.message;
                    diags.push_back(std::move(wrapped));
                }
            }
        }
        items.push_back(std::move(item));
    }

    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = i + 1; j < items.size(); ++j)
            if (items[i].id == items[j].id)
                diags.push_back(make_error(codes::duplicate_name, "duplicate item id '" + items[i].id + "'"));

    if (has_errors(diags))
        return diags;
    std::stable_sort(items.begin(), items.end(),
                     [](const QAItem& a, const QAItem& b) { return natural_less(a.id, b.id); });
    return items;
}

Result<std::vector<QAItem>> load_dataset(const std::string& path, const Model& model, const AliasMap& aliases)
{
    auto doc = read_json(path);
    if (!doc)
        return doc.diagnostics();
    return parse_dataset(doc.value(), model, aliases);
}

json item_to_json(const QAItem& item)
{
    return json{ { "id", item.id },
                 { "q", item.question },
                 { "cat", category_name(item.category) },
                 { "context", item.context },
                 { "spec", item.spec },
                 { "formal_spec", item.formal_spec },
                 { "groundtruth", answer_name(item.groundtruth) } };
}

} // namespace mcfr
