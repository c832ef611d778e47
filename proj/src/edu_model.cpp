#include "mcfr/edu_model.hpp"

#include "mcfr/model_dsl.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>

#ifndef MCFR_SOURCE_ASSET_DIR
#define MCFR_SOURCE_ASSET_DIR "assets"
#endif

namespace mcfr {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void broken_asset(std::string_view file, const std::vector<Diagnostic>& diags)
{
    std::string msg = "bundled asset '" + std::string(file) + "' is unusable";
    for (const auto& d : diags)
        msg += "\n  " + format_diagnostic(d, file);
    throw std::runtime_error(msg);
}

} // namespace

fs::path asset_dir()
{
    if (const char* env = std::getenv("MCFR_ASSET_DIR"); env && *env)
        return env;
    std::error_code ec;
    const auto exe = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        const auto installed = exe.parent_path().parent_path() / "share" / "mcfr" / "assets";
        if (fs::is_directory(installed, ec))
            return installed;
    }
    return MCFR_SOURCE_ASSET_DIR;
}

std::string asset_path(std::string_view file)
{
    return (asset_dir() / file).string();
}

Result<FactBase> load_facts(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::vector<Diagnostic>{ make_error(codes::io, "cannot open '" + path + "'") };
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        return std::vector<Diagnostic>{ make_error(codes::syntax, "'" + path + "' is not valid JSON: " + e.what()) };
    }
    if (!doc.is_array())
        return std::vector<Diagnostic>{ make_error(codes::syntax, "fact file must be a JSON array") };

    FactBase facts;
    std::vector<Diagnostic> diags;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        Fact f;
        bool ok = rec.is_object();
        for (const auto& [key, slot] : { std::pair{ "s", &f.subject }, std::pair{ "p", &f.predicate },
                                         std::pair{ "o", &f.object }, std::pair{ "display", &f.display } }) {
            if (!ok)
                break;
            const auto it = rec.find(key);
            if (it == rec.end() || !it->is_string()) {
                diags.push_back(make_error(codes::missing_field, "fact " + std::to_string(i + 1)
                                                                     + ": missing string field '" + key + "'"));
                ok = false;
                break;
            }
            *slot = it->get<std::string>();
        }
        if (!rec.is_object())
            diags.push_back(make_error(codes::syntax, "fact " + std::to_string(i + 1) + ": not a JSON object"));
        if (ok)
            facts.push_back(std::move(f));
    }
    if (!diags.empty())
        return diags;
    return facts;
}

Model build_edu_model()
{
    auto m = load_model_file(asset_path("student_lifecycle.mcm"));
    if (!m)
        broken_asset("student_lifecycle.mcm", m.diagnostics());
    return std::move(m).value();
}

FactBase edu_facts()
{
    auto f = load_facts(asset_path("edu_facts.json"));
    if (!f)
        broken_asset("edu_facts.json", f.diagnostics());
    return std::move(f).value();
}

AliasMap edu_aliases()
{
    auto a = load_aliases(asset_path("aliases.json"));
    if (!a)
        broken_asset("aliases.json", a.diagnostics());
    return std::move(a).value();
}

std::vector<QAItem> edu_mini_dataset()
{
    const auto model = build_edu_model();
    auto d = load_dataset(asset_path("edumc_mini.json"), model, edu_aliases());
    if (!d)
        broken_asset("edumc_mini.json", d.diagnostics());
    return std::move(d).value();
}

} // namespace mcfr
