#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace whatif {

struct ApiOptions {
    /// Write-through persistence; sessions found here are reloaded on start.
    std::optional<std::filesystem::path> data_dir;
    /// Worker threads handed to discovery and sampling; 0 picks hardware concurrency.
    unsigned threads = 0;
};

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::string content_type;
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Transport-independent request router holding the session store.
///
///   POST   /datasets                 delimited text, or {data, config}
///   GET    /datasets/{id}
///   POST   /datasets/{id}/discover   {penaltyDiscount, maxParents, smoothing, async}
///   GET    /jobs/{id}
///   GET    /graphs/{id}[?focus=name] layout document
///   GET    /graphs/{id}/graph        graph document
///   POST   /graphs/{id}/intervene    {assignments:[{column,value}], sampleCount, seed}
///   POST   /graphs/{id}/attribute    {column, value, sampleCount, seed}
///   DELETE /graphs/{id}/results
///   GET    /health
class Api {
public:
    explicit Api(ApiOptions options = {});
    ~Api();
    Api(const Api&) = delete;
    Api& operator=(const Api&) = delete;

    Response handle(const Request& request);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t payload_cap = 100u * 1024u * 1024u;
};

/// Reads WHATIF_BIND and WHATIF_PORT over the given defaults.
ServerOptions server_options_from_env(ServerOptions defaults = {});

/// HTTP/1.1 front end for an Api.
class HttpServer {
public:
    HttpServer(Api& api, ServerOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket; port 0 picks a free port. Returns the bound port or -1.
    int bind();
    /// Blocks until stop().
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace whatif
