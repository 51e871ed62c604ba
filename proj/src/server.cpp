#include "whatif/server.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "whatif/discovery.hpp"
#include "whatif/documents.hpp"
#include "whatif/inference.hpp"
#include "whatif/layout.hpp"

namespace whatif {

namespace {

struct HttpError {
    int status;
    ErrorCode code;
    std::string message;
};

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::InvalidDocument: return 400;
        case ErrorCode::Internal: return 500;
        default: return 422;
    }
}

Response json_response(const Json& doc, int status = 200) { return {status, render(doc)}; }

Response error_response(int status, ErrorCode code, std::string_view message) {
    return json_response(error_document(code, message), status);
}

Json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    try {
        return Json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw HttpError{400, ErrorCode::InvalidDocument, std::string("request body is not valid JSON: ") + e.what()};
    }
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start < path.size()) {
        auto end = path.find('/', start);
        if (end == std::string_view::npos) end = path.size();
        if (end > start) parts.emplace_back(path.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

std::string make_id(std::string_view prefix, std::size_t n) { return std::string(prefix) + std::to_string(n); }

// Numeric suffix of an id produced by make_id, or 0.
std::size_t id_number(std::string_view id, std::string_view prefix) {
    if (id.substr(0, prefix.size()) != prefix) return 0;
    std::size_t n = 0;
    auto rest = id.substr(prefix.size());
    std::from_chars(rest.data(), rest.data() + rest.size(), n);
    return n;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

struct DatasetEntry {
    std::string id;
    std::shared_ptr<const Dataset> data;
    std::string raw;
    std::string config;  // JSON text, empty for defaults
};

struct GraphSession {
    std::string id;
    std::string dataset_id;
    std::shared_ptr<const Dataset> data;
    ScoreParams params;
    double smoothing = 1.0;
    std::unique_ptr<CpdModel> model;
    LayoutGraph layout;

    std::mutex results_mutex;
    std::optional<Json> last_intervention;
    std::optional<AttributionResult> last_attribution;

    const CausalGraph& graph() const { return model->graph(); }
};

struct Job {
    std::string id;
    std::mutex mutex;
    std::string status = "running";
    Json result;
};

struct Api::Impl {
    ApiOptions options;

    std::shared_mutex store_mutex;
    std::map<std::string, std::shared_ptr<DatasetEntry>> datasets;
    std::map<std::string, std::shared_ptr<GraphSession>> graphs;
    std::map<std::string, std::shared_ptr<Job>> jobs;
    std::atomic<std::size_t> next_dataset{1}, next_graph{1}, next_job{1};

    std::mutex workers_mutex;
    std::vector<std::jthread> workers;

    explicit Impl(ApiOptions opts) : options(std::move(opts)) {
        if (options.data_dir) reload();
    }

    ~Impl() {
        std::lock_guard lock(workers_mutex);
        workers.clear();  // joins
    }

    std::shared_ptr<DatasetEntry> find_dataset(const std::string& id) {
        std::shared_lock lock(store_mutex);
        auto it = datasets.find(id);
        if (it == datasets.end()) throw HttpError{404, ErrorCode::NotFound, "unknown dataset '" + id + "'"};
        return it->second;
    }

    std::shared_ptr<GraphSession> find_graph(const std::string& id) {
        std::shared_lock lock(store_mutex);
        auto it = graphs.find(id);
        if (it == graphs.end()) throw HttpError{404, ErrorCode::NotFound, "unknown graph '" + id + "'"};
        return it->second;
    }

    static std::shared_ptr<const Dataset> load_dataset(const std::string& raw, const std::string& config) {
        DatasetConfig cfg;
        if (!config.empty()) cfg = parse_dataset_config(config);
        return std::make_shared<const Dataset>(ingest_text(raw, cfg.columns, cfg.options));
    }

    std::shared_ptr<GraphSession> make_session(const std::string& id, const std::shared_ptr<DatasetEntry>& entry,
                                               CausalGraph graph, const ScoreParams& params, double smoothing) {
        auto session = std::make_shared<GraphSession>();
        session->id = id;
        session->dataset_id = entry->id;
        session->data = entry->data;
        session->params = params;
        session->smoothing = smoothing;
        session->model = std::make_unique<CpdModel>(fit_cpds(*entry->data, graph, smoothing));
        session->layout = build_layout(session->model->graph());
        return session;
    }

    Json dataset_response(const DatasetEntry& entry) {
        return Json{{"schemaVersion", kSchemaVersion},
                    {"datasetId", entry.id},
                    {"summary", dataset_summary_document(*entry.data)}};
    }

    // Persistence layout: datasets/<id>.data, datasets/<id>.config.json, graphs/<id>.json.
    void persist_dataset(const DatasetEntry& entry) {
        if (!options.data_dir) return;
        const auto dir = *options.data_dir / "datasets";
        std::filesystem::create_directories(dir);
        write_file(dir / (entry.id + ".config.json"), entry.config.empty() ? "null" : entry.config);
        write_file(dir / (entry.id + ".data"), entry.raw);
    }

    void persist_graph(const GraphSession& session) {
        if (!options.data_dir) return;
        const auto dir = *options.data_dir / "graphs";
        std::filesystem::create_directories(dir);
        Json doc{{"datasetId", session.dataset_id},
                 {"smoothing", session.smoothing},
                 {"graph", graph_document(session.graph(), session.params)}};
        write_file(dir / (session.id + ".json"), render(doc));
    }

    void reload() {
        namespace fs = std::filesystem;
        const auto ds_dir = *options.data_dir / "datasets";
        if (fs::exists(ds_dir)) {
            for (const auto& file : fs::directory_iterator(ds_dir)) {
                if (file.path().extension() != ".data") continue;
                auto entry = std::make_shared<DatasetEntry>();
                entry->id = file.path().stem().string();
                next_dataset = std::max<std::size_t>(next_dataset, id_number(entry->id, "ds") + 1);
                try {
                    entry->raw = read_file(file.path());
                    auto config = read_file(ds_dir / (entry->id + ".config.json"));
                    entry->config = config == "null" ? "" : config;
                    entry->data = load_dataset(entry->raw, entry->config);
                    datasets[entry->id] = entry;
                } catch (const std::exception& e) {
                    std::cerr << "skipping stored dataset " << entry->id << ": " << e.what() << "\n";
                }
            }
        }
        const auto graph_dir = *options.data_dir / "graphs";
        if (fs::exists(graph_dir)) {
            for (const auto& file : fs::directory_iterator(graph_dir)) {
                if (file.path().extension() != ".json") continue;
                const auto id = file.path().stem().string();
                next_graph = std::max<std::size_t>(next_graph, id_number(id, "g") + 1);
                try {
                    auto doc = Json::parse(read_file(file.path()));
                    auto it = datasets.find(doc.at("datasetId").get<std::string>());
                    if (it == datasets.end()) throw Error(ErrorCode::NotFound, "its dataset was not restored");
                    auto parsed = graph_from_document(doc.at("graph"));
                    auto graph = bind_to_dataset(parsed.graph, *it->second->data);
                    graphs[id] = make_session(id, it->second, std::move(graph), parsed.params,
                                              doc.at("smoothing").get<double>());
                } catch (const std::exception& e) {
                    std::cerr << "skipping stored graph " << id << ": " << e.what() << "\n";
                }
            }
        }
    }

    Response post_dataset(const Request& req) {
        auto entry = std::make_shared<DatasetEntry>();
        try {
            if (req.content_type.starts_with("application/json")) {
                auto body = parse_body(req.body);
                if (!body.is_object() || !body.contains("data") || !body["data"].is_string())
                    throw HttpError{400, ErrorCode::InvalidDocument, "expected {\"data\": <text>, \"config\": {...}}"};
                entry->raw = body["data"].get<std::string>();
                if (body.contains("config") && !body["config"].is_null()) entry->config = body["config"].dump();
            } else {
                entry->raw = req.body;
            }
            entry->data = load_dataset(entry->raw, entry->config);
        } catch (const Error& e) {
            throw HttpError{400, e.code(), e.what()};
        }
        entry->id = make_id("ds", next_dataset++);
        persist_dataset(*entry);
        {
            std::unique_lock lock(store_mutex);
            datasets[entry->id] = entry;
        }
        return json_response(dataset_response(*entry), 201);
    }

    Json run_discovery(const std::shared_ptr<DatasetEntry>& entry, const ScoreParams& params, double smoothing) {
        DiscoveryOptions opts;
        opts.threads = options.threads;
        auto graph = discover(*entry->data, params, std::nullopt, opts);
        const auto id = make_id("g", next_graph++);
        auto session = make_session(id, entry, std::move(graph), params, smoothing);
        persist_graph(*session);
        Json doc{{"schemaVersion", kSchemaVersion},
                 {"graphId", id},
                 {"datasetId", entry->id},
                 {"score", session->graph().score},
                 {"edgeCount", session->graph().edge_count()}};
        std::unique_lock lock(store_mutex);
        graphs[id] = std::move(session);
        return doc;
    }

    Response post_discover(const std::string& dataset_id, const Request& req) {
        auto entry = find_dataset(dataset_id);
        const auto body = parse_body(req.body);
        const auto params = score_params_from_document(body);
        double smoothing = 1.0;
        if (body.is_object() && body.contains("smoothing")) {
            if (!body["smoothing"].is_number() || body["smoothing"].get<double>() < 0.0)
                throw Error(ErrorCode::InvalidConfig, "smoothing must be a non-negative number");
            smoothing = body["smoothing"].get<double>();
        }
        const bool async = body.is_object() && body.value("async", false);
        if (!async) return json_response(run_discovery(entry, params, smoothing));

        auto job = std::make_shared<Job>();
        job->id = make_id("job", next_job++);
        {
            std::unique_lock lock(store_mutex);
            jobs[job->id] = job;
        }
        std::lock_guard lock(workers_mutex);
        workers.emplace_back([this, job, entry, params, smoothing] {
            Json result;
            std::string status = "done";
            try {
                result = run_discovery(entry, params, smoothing);
            } catch (const Error& e) {
                status = "failed";
                result = error_document(e.code(), e.what());
            } catch (const std::exception& e) {
                status = "failed";
                result = error_document(ErrorCode::Internal, e.what());
            }
            std::lock_guard job_lock(job->mutex);
            job->status = status;
            job->result = std::move(result);
        });
        return json_response(job_document(*job), 202);
    }

    static Json job_document(Job& job) {
        std::lock_guard lock(job.mutex);
        Json doc{{"schemaVersion", kSchemaVersion}, {"jobId", job.id}, {"status", job.status}};
        if (job.status == "done") doc["result"] = job.result;
        if (job.status == "failed") doc["error"] = job.result["error"];
        return doc;
    }

    Response get_job(const std::string& id) {
        std::shared_ptr<Job> job;
        {
            std::shared_lock lock(store_mutex);
            auto it = jobs.find(id);
            if (it == jobs.end()) throw HttpError{404, ErrorCode::NotFound, "unknown job '" + id + "'"};
            job = it->second;
        }
        return json_response(job_document(*job));
    }

    Response get_layout(const std::string& id, const Request& req) {
        auto session = find_graph(id);
        std::optional<AttributionResult> attribution;
        {
            std::lock_guard lock(session->results_mutex);
            attribution = session->last_attribution;
        }
        const auto* attr = attribution ? &*attribution : nullptr;
        auto focus = req.query.find("focus");
        if (focus == req.query.end() || focus->second.empty())
            return json_response(layout_document(session->layout, session->data.get(), attr));
        auto node = session->graph().find_by_name(focus->second);
        if (!node) throw Error(ErrorCode::UnknownNode, "graph has no node '" + focus->second + "'");
        auto focused = build_layout(causal_subgraph(session->graph(), *node));
        return json_response(layout_document(focused, session->data.get(), attr));
    }

    Response post_intervene(const std::string& id, const Request& req) {
        auto session = find_graph(id);
        const auto body = parse_body(req.body);
        const auto spec = intervention_spec_from_document(*session->model, body);
        auto doc = intervention_document(*session->model, intervene(*session->model, spec, options.threads));
        std::lock_guard lock(session->results_mutex);
        session->last_intervention = doc;
        return json_response(doc);
    }

    Response post_attribute(const std::string& id, const Request& req) {
        auto session = find_graph(id);
        const auto body = parse_body(req.body);
        std::pair<NodeId, Code> target;
        AttributionOptions opts;
        opts.threads = options.threads;
        try {
            target = resolve_assignment(*session->model, body.at("column").get<std::string>(),
                                        body.at("value").get<std::string>());
            opts.sample_count = body.value("sampleCount", opts.sample_count);
            opts.seed = body.value("seed", opts.seed);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidTarget, std::string("expected {column, value}: ") + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidTarget, e.what());
        }
        auto result = attribute(*session->model, target.first, target.second, opts);
        auto doc = attribution_document(*session->model, result, &session->layout);
        std::lock_guard lock(session->results_mutex);
        session->last_attribution = std::move(result);
        return json_response(doc);
    }

    Response delete_results(const std::string& id) {
        auto session = find_graph(id);
        std::lock_guard lock(session->results_mutex);
        session->last_intervention.reset();
        session->last_attribution.reset();
        return json_response(Json{{"schemaVersion", kSchemaVersion}, {"graphId", id}, {"cleared", true}});
    }

    Response route(const Request& req) {
        const auto parts = split_path(req.path);
        const auto& m = req.method;
        const auto n = parts.size();
        if (m == "GET" && n == 1 && parts[0] == "health")
            return json_response(Json{{"schemaVersion", kSchemaVersion}, {"status", "ok"}});
        if (n >= 1 && parts[0] == "datasets") {
            if (m == "POST" && n == 1) return post_dataset(req);
            if (m == "GET" && n == 2) return json_response(dataset_response(*find_dataset(parts[1])));
            if (m == "POST" && n == 3 && parts[2] == "discover") return post_discover(parts[1], req);
        }
        if (m == "GET" && n == 2 && parts[0] == "jobs") return get_job(parts[1]);
        if (n >= 2 && parts[0] == "graphs") {
            if (m == "GET" && n == 2) return get_layout(parts[1], req);
            if (m == "GET" && n == 3 && parts[2] == "graph") {
                auto session = find_graph(parts[1]);
                return json_response(graph_document(session->graph(), session->params));
            }
            if (m == "POST" && n == 3 && parts[2] == "intervene") return post_intervene(parts[1], req);
            if (m == "POST" && n == 3 && parts[2] == "attribute") return post_attribute(parts[1], req);
            if (m == "DELETE" && n == 3 && parts[2] == "results") return delete_results(parts[1]);
        }
        throw HttpError{404, ErrorCode::NotFound, "no route for " + m + " " + req.path};
    }
};

Api::Api(ApiOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Api::~Api() = default;

Response Api::handle(const Request& request) {
    try {
        return impl_->route(request);
    } catch (const HttpError& e) {
        return error_response(e.status, e.code, e.message);
    } catch (const Error& e) {
        return error_response(status_for(e.code()), e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
        return error_response(400, ErrorCode::InvalidDocument, e.what());
    } catch (const std::exception& e) {
        return error_response(500, ErrorCode::Internal, e.what());
    }
}

ServerOptions server_options_from_env(ServerOptions defaults) {
    if (const char* bind = std::getenv("WHATIF_BIND"); bind && *bind) defaults.host = bind;
    if (const char* port = std::getenv("WHATIF_PORT"); port && *port) {
        int value = 0;
        auto [ptr, ec] = std::from_chars(port, port + std::strlen(port), value);
        if (ec == std::errc() && *ptr == '\0') defaults.port = value;
    }
    return defaults;
}

struct HttpServer::Impl {
    Impl(Api& a, ServerOptions o) : api(a), options(std::move(o)) {}
    Api& api;
    ServerOptions options;
    httplib::Server server;
};

HttpServer::HttpServer(Api& api, ServerOptions options)
    : impl_(std::make_unique<Impl>(api, std::move(options))) {
    auto& svr = impl_->server;
    svr.set_payload_max_length(impl_->options.payload_cap);
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        Request r{req.method, req.path, {}, req.body, req.get_header_value("Content-Type")};
        for (const auto& [k, v] : req.params) r.query.emplace(k, v);
        auto out = impl_->api.handle(r);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    svr.Get(".*", handler);
    svr.Post(".*", handler);
    svr.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    auto& o = impl_->options;
    if (o.port == 0) return impl_->server.bind_to_any_port(o.host);
    return impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace whatif
