#include "mcfr/llm_client.hpp"

#include <httplib.h>

#include <vector>

namespace mcfr {

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw NetworkError("endpoint '" + url + "' is not an absolute http(s) URL");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return { url, "/" };
    return { url.substr(0, path_start), url.substr(path_start) };
}

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

} // namespace

HttpLlmTransport::HttpLlmTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpLlmTransport::complete(const nlohmann::json& request)
{
    const auto [origin, path] = split_url(endpoint_.url);
    httplib::Client client(origin);
    if (!client.is_valid())
        throw NetworkError("cannot create a client for '" + origin + "' (https needs OpenSSL support)");
    const auto secs = endpoint_.timeout.count() / 1000;
    const auto usecs = (endpoint_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!endpoint_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

    const auto res = client.Post(path, headers, request.dump(), "application/json");
    if (!res)
        throw NetworkError("request to '" + endpoint_.url + "' failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw NetworkError("endpoint returned HTTP " + std::to_string(res->status));

    try {
        const auto body = nlohmann::json::parse(res->body);
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw NetworkError(std::string("malformed completion response: ") + e.what());
    }
}

std::string extract_query_line(std::string_view completion)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= completion.size()) {
        auto end = completion.find('\n', start);
        if (end == std::string_view::npos)
            end = completion.size();
        const auto line = trim(completion.substr(start, end - start));
        if (!line.empty() && !line.starts_with("```"))
            lines.push_back(line);
        start = end + 1;
    }
    if (lines.empty())
        return {};
    auto q = lines.back();
    while (q.size() >= 2 && q.front() == '`' && q.back() == '`')
        q = trim(q.substr(1, q.size() - 2));
    return std::string(q);
}

} // namespace mcfr
