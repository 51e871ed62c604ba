#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "whatif/discovery.hpp"
#include "whatif/documents.hpp"
#include "whatif/inference.hpp"
#include "whatif/layout.hpp"
#include "whatif/server.hpp"

using namespace whatif;

namespace {

// Bad paths and unreadable files; reported with exit code 1 like module errors.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

Dataset load_dataset(const std::string& data, const std::string& config) {
    DatasetConfig cfg;
    if (!config.empty()) cfg = parse_dataset_config(read_file(config));
    return ingest_text(read_file(data), cfg.columns, cfg.options);
}

GraphFile load_graph(const std::string& path) {
    Json doc;
    try {
        doc = Json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidDocument, path + ": " + e.what());
    }
    return graph_from_document(doc);
}

std::string fixed(double v, int precision = 4) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

struct DataArgs {
    std::string data, config;
};

void add_data_options(CLI::App* cmd, DataArgs& args, bool required) {
    auto* opt = cmd->add_option("--data", args.data, "Delimited data file");
    if (required) opt->required();
    cmd->add_option("--config", args.config, "Column config (JSON)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal discovery, layout and what-if analysis for categorical tables"};
    app.require_subcommand(1);

    DataArgs data;
    std::string out, graph_path, set_list, target;
    double penalty = 1.0, smoothing = 1.0;
    std::size_t max_parents = 8, samples = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    auto* discover_cmd = app.add_subcommand("discover", "Learn a causal graph and write the graph document");
    add_data_options(discover_cmd, data, true);
    discover_cmd->add_option("--penalty", penalty, "Penalty discount")->capture_default_str();
    discover_cmd->add_option("--max-parents", max_parents, "Parent cap")->capture_default_str();
    discover_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    discover_cmd->add_option("--out", out, "Graph document output")->required();

    auto* layout_cmd = app.add_subcommand("layout", "Lay out a graph document");
    layout_cmd->add_option("--graph", graph_path, "Graph document")->required();
    add_data_options(layout_cmd, data, false);
    layout_cmd->add_option("--out", out, "Layout document output")->required();

    auto* intervene_cmd = app.add_subcommand("intervene", "Estimate distributions under do(col=value, ...)");
    intervene_cmd->add_option("--graph", graph_path, "Graph document")->required();
    add_data_options(intervene_cmd, data, true);
    intervene_cmd->add_option("--set", set_list, "col=value[,col=value]");
    intervene_cmd->add_option("--samples", samples, "Monte Carlo samples")->capture_default_str();
    intervene_cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();
    intervene_cmd->add_option("--smoothing", smoothing, "CPD pseudo-count")->capture_default_str();
    intervene_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    intervene_cmd->add_option("--out", out, "Intervention document output");

    auto* attribute_cmd = app.add_subcommand("attribute", "Rank the causes of a target value");
    attribute_cmd->add_option("--graph", graph_path, "Graph document")->required();
    add_data_options(attribute_cmd, data, true);
    attribute_cmd->add_option("--target", target, "col=value")->required();
    attribute_cmd->add_option("--samples", samples, "Monte Carlo samples when enumeration is too large")
        ->capture_default_str();
    attribute_cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();
    attribute_cmd->add_option("--smoothing", smoothing, "CPD pseudo-count")->capture_default_str();
    attribute_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    attribute_cmd->add_option("--out", out, "Attribution document output");

    auto server_defaults = server_options_from_env();
    std::string data_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--port", server_defaults.port, "Port (env WHATIF_PORT)")->capture_default_str();
    serve_cmd->add_option("--bind", server_defaults.host, "Bind address (env WHATIF_BIND)")->capture_default_str();
    serve_cmd->add_option("--data-dir", data_dir, "Persistence directory");
    serve_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*discover_cmd) {
            ScoreParams params{penalty, max_parents};
            params.validate();
            auto ds = load_dataset(data.data, data.config);
            auto graph = discover(ds, params, std::nullopt, {threads});
            write_file(out, render(graph_document(graph, params)));
            std::cout << "score " << fixed(graph.score) << "\nedges " << graph.edge_count() << "\n";
        } else if (*layout_cmd) {
            auto file = load_graph(graph_path);
            std::optional<Dataset> ds;
            if (!data.data.empty()) {
                ds = load_dataset(data.data, data.config);
                file.graph = bind_to_dataset(file.graph, *ds);
            }
            auto layout = build_layout(file.graph);
            write_file(out, render(layout_document(layout, ds ? &*ds : nullptr)));
            std::cout << "layers " << layout.layers << "\ncrossings " << layout.crossings << "\n";
        } else if (*intervene_cmd) {
            auto ds = load_dataset(data.data, data.config);
            auto graph = bind_to_dataset(load_graph(graph_path).graph, ds);
            auto model = fit_cpds(ds, graph, smoothing);
            InterventionSpec spec;
            for (const auto& [col, value] : parse_assignment_list(set_list))
                spec.assignments.push_back(resolve_assignment(model, col, value));
            spec.sample_count = samples;
            spec.seed = seed;
            validate_spec(model, spec);
            auto result = intervene(model, spec, threads);
            if (!out.empty()) write_file(out, render(intervention_document(model, result)));
            for (const auto& d : result.dimensions) {
                const auto& labels = model.labels(d.column);
                for (std::size_t v = 0; v < labels.size(); ++v)
                    std::cout << graph.node(d.column).name << "\t" << labels[v] << "\t" << fixed(d.original[v])
                              << "\t" << fixed(d.estimated[v]) << "\n";
            }
        } else if (*attribute_cmd) {
            auto ds = load_dataset(data.data, data.config);
            auto graph = bind_to_dataset(load_graph(graph_path).graph, ds);
            auto model = fit_cpds(ds, graph, smoothing);
            auto parsed = parse_assignment_list(target);
            if (parsed.size() != 1) throw Error(ErrorCode::InvalidTarget, "--target expects exactly one col=value");
            std::pair<NodeId, Code> t;
            try {
                t = resolve_assignment(model, parsed[0].first, parsed[0].second);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidTarget, e.what());
            }
            AttributionOptions opts;
            opts.sample_count = samples;
            opts.seed = seed;
            opts.threads = threads;
            auto result = attribute(model, t.first, t.second, opts);
            auto layout = build_layout(model.graph());
            auto doc = attribution_document(model, result, &layout);
            if (!out.empty()) write_file(out, render(doc));
            std::size_t rank = 1;
            for (const auto& name : doc["ranking"]) {
                const auto id = *graph.find_by_name(name.get<std::string>());
                for (const auto& e : result.effects)
                    if (e.node == id)
                        std::cout << rank++ << "\t" << name.get<std::string>() << "\t" << fixed(e.effect) << "\t"
                                  << (e.top_value ? model.labels(id)[*e.top_value] : "") << "\n";
            }
        } else if (*serve_cmd) {
            ApiOptions api_options;
            if (!data_dir.empty()) api_options.data_dir = data_dir;
            api_options.threads = threads;
            Api api(api_options);
            HttpServer server(api, server_defaults);
            const int port = server.bind();
            if (port < 0) throw InputError("cannot bind " + server_defaults.host + ":" +
                                           std::to_string(server_defaults.port));
            std::cout << "listening on " << server_defaults.host << ":" << port << std::endl;
            return server.listen() ? 0 : 2;
        }
    } catch (const Error& e) {
        std::cerr << error_module(e.code()) << ": " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return e.code() == ErrorCode::Internal ? 2 : 1;
    } catch (const InputError& e) {
        std::cerr << "input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
