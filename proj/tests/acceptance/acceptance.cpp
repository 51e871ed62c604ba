// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <thread>

#include "support.hpp"
#include "whatif/discovery.hpp"
#include "whatif/documents.hpp"
#include "whatif/inference.hpp"
#include "whatif/layout.hpp"
#include "whatif/scoring.hpp"

using namespace whatif;
namespace fs = std::filesystem;

namespace tol {
// Criterion 1
constexpr double kBalancedScore = -13.1698;  // printed to 4 decimals
constexpr double kBalancedScoreTol = 1e-6;   // against the exact hand value -19 ln 2
constexpr double kDecomposedTol = 1e-9;
constexpr double kScoreSeconds = 1.0;
// Criterion 2
constexpr double kGreedyDeltaTol = 1e-9;
constexpr double kGreedySeconds = 30.0;
// Criterion 3
constexpr double kChainSeconds = 5.0;
// Criterion 5
constexpr std::size_t kMcSamples = 50000;
constexpr double kMcL1 = 0.03;
constexpr double kDoB1 = 0.9;
constexpr double kDoB1Tol = 0.02;
constexpr double kNonDescendantL1 = 0.05;
constexpr double kInterventionSeconds = 60.0;
// Criterion 6
constexpr double kEffect = 0.8;
constexpr double kEffectTol = 0.02;
constexpr double kExactEffectTol = 1e-12;
// Criterion 7
constexpr double kLayoutSeconds = 1.0;
// Criterion 9
constexpr double kScaleSeconds = 600.0;
constexpr unsigned kScaleThreads = 4;
}  // namespace tol

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

Dataset load_audiology() {
    std::ifstream in(WHATIF_DATA_DIR "/audiology.csv");
    return ingest(in, {});
}

CausalGraph graph_of(const Dataset& ds, const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::vector<GraphNode> nodes;
    for (ColumnId c = 0; c < ds.column_count(); ++c) nodes.push_back({c, ds.name(c)});
    CausalGraph g(nodes);
    for (auto [s, t] : edges) g.add_edge(s, t);
    return g;
}

// A fair; B = A with probability 0.9, with exact proportions.
Dataset ab_dataset() {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 10000; ++i) {
        const int a = i % 2;
        const int b = (i / 2) % 10 == 0 ? 1 - a : a;
        rows.push_back({std::to_string(a), std::to_string(b)});
    }
    return testing::make_dataset({"A", "B"}, rows);
}

Outcome score_correctness() {
    Outcome out;
    const auto t0 = Clock::now();
    auto ds = testing::make_dataset({"A"}, {{"0"}, {"1"}, {"0"}, {"1"}, {"0"}, {"1"}, {"0"}, {"1"}});
    const double got = local_score(ds, LocalScoreKey::make(0, {}), {});
    const double hand = 16.0 * std::log(0.5) - std::log(8.0);
    out.require(std::abs(got - hand) <= tol::kBalancedScoreTol, "local score vs hand value");
    out.require(std::round(got * 1e4) / 1e4 == tol::kBalancedScore, "4-decimal value -13.1698");
    out.note("local=" + fmt(got, "%.7f"));

    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        auto data = testing::random_binary_dataset(rng, n, 40 + trial);
        testing::MatrixGraph m(n);
        auto g = empty_graph(data);
        for (std::size_t t = 1; t < n; ++t)
            for (std::size_t s = 0; s < t; ++s)
                if (rng() % 2) {
                    m.adj[s][t] = true;
                    g.add_edge(s, t);
                }
        Scorer scorer(data, {});
        worst = std::max(worst, std::abs(scorer.graph_score(g) - m.score(data, 1.0)));
    }
    out.require(worst <= tol::kDecomposedTol, "decomposed vs rescored");
    out.note("100 graphs max|diff|=" + fmt(worst, "%.2e"));
    const double secs = seconds_since(t0);
    out.require(secs < tol::kScoreSeconds, "runtime");
    out.note(fmt(secs, "%.3f") + "s");
    return out;
}

bool has_positive_move(const Scorer& scorer, const CausalGraph& g, std::size_t cap) {
    for (const auto& e : g.edges())
        if (scorer.delta_delete(g, e.source, e.target) > 0.0) return true;
    for (const auto& s : g.nodes()) {
        for (const auto& t : g.nodes()) {
            if (s.id == t.id || g.adjacent(s.id, t.id) || g.reaches(t.id, s.id)) continue;
            if (g.parents(t.id).size() >= cap) continue;
            auto d = scorer.delta_insert(g, s.id, t.id);
            if (d && *d > 0.0) return true;
        }
    }
    return false;
}

Outcome greedy_soundness() {
    Outcome out;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    std::size_t moves = 0, mismatched = 0, nonpositive = 0, cyclic = 0, not_max = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto k = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
        const auto n = std::uniform_int_distribution<std::size_t>(10, 200)(rng);
        auto ds = testing::random_binary_dataset(rng, k, n);
        auto g = discover(ds, {});
        auto oracle = testing::oracle_greedy(ds, 1.0, 8);
        bool same = g.trace.size() == oracle.size();
        for (std::size_t i = 0; same && i < oracle.size(); ++i) {
            same = (g.trace[i].kind == MoveKind::Insert) == oracle[i].insert && g.trace[i].source == oracle[i].source &&
                   g.trace[i].target == oracle[i].target &&
                   std::abs(g.trace[i].delta - oracle[i].delta) <= tol::kGreedyDeltaTol * std::max(1.0, std::abs(oracle[i].delta));
        }
        mismatched += !same;
        moves += g.trace.size();
        for (const auto& m : g.trace) nonpositive += !(m.delta > 0.0);
        cyclic += !g.is_acyclic();
        not_max += has_positive_move(Scorer(ds, {}), g, 8);
    }
    out.require(mismatched == 0, std::to_string(mismatched) + " traces differ from oracle");
    out.require(nonpositive == 0, std::to_string(nonpositive) + " non-positive deltas");
    out.require(cyclic == 0, std::to_string(cyclic) + " cyclic results");
    out.require(not_max == 0, std::to_string(not_max) + " results with an improving single-edge move");
    out.note("50 datasets, " + std::to_string(moves) + " moves matched");
    const double secs = seconds_since(t0);
    out.require(secs < tol::kGreedySeconds, "runtime");
    out.note(fmt(secs, "%.3f") + "s");
    return out;
}

Outcome structure_recovery() {
    Outcome out;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 5000; ++i) {
        const int a = u(rng) < 0.5;
        const int b = u(rng) < 0.9 ? a : 1 - a;
        const int c = u(rng) < 0.9 ? b : 1 - b;
        rows.push_back({std::to_string(a), std::to_string(b), std::to_string(c)});
    }
    auto g = discover(testing::make_dataset({"A", "B", "C"}, rows), {});
    out.require(g.edge_count() == 2 && g.adjacent(0, 1) && g.adjacent(1, 2), "skeleton {A-B, B-C}");
    out.require(!g.adjacent(0, 2), "no A-C edge");
    std::string edges;
    for (const auto& e : g.edges()) edges += (edges.empty() ? "" : " ") + g.node(e.source).name + "->" + g.node(e.target).name;
    out.note("edges: " + edges);
    const double secs = seconds_since(t0);
    out.require(secs < tol::kChainSeconds, "runtime");
    out.note(fmt(secs, "%.3f") + "s");
    return out;
}

Outcome uncertainty_positivity() {
    Outcome out;
    std::size_t edges = 0, bad = 0;
    double smallest = std::numeric_limits<double>::infinity();
    auto check = [&](const Dataset& ds) {
        for (const auto& e : discover(ds, {}).edges()) {
            ++edges;
            bad += !(e.uncertainty > 0.0);
            smallest = std::min(smallest, e.uncertainty);
        }
    };
    check(load_audiology());
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) check(testing::random_binary_dataset(rng, 3 + i % 4, 100 + 20 * i));
    out.require(bad == 0, std::to_string(bad) + " non-positive uncertainties");
    out.note(std::to_string(edges) + " edges, min=" + fmt(smallest, "%.4g"));

    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 1000; ++i) {
        const auto a = std::to_string(i % 2);
        const auto c = std::to_string((i / 2) % 2);
        const auto d = (i / 4) % 10 < 6 ? c : std::to_string(1 - (i / 2) % 2);
        rows.push_back({a, a, c, d});
    }
    auto g = discover(testing::make_dataset({"A", "B", "C", "D"}, rows), {});
    const bool both = g.adjacent(0, 1) && g.adjacent(2, 3);
    out.require(both, "both pairs connected");
    if (both) {
        const double det = g.has_edge(0, 1) ? g.uncertainty(0, 1) : g.uncertainty(1, 0);
        const double weak = g.has_edge(2, 3) ? g.uncertainty(2, 3) : g.uncertainty(3, 2);
        out.require(det > weak, "deterministic > 60/40");
        out.note("deterministic=" + fmt(det, "%.2f") + " vs 60/40=" + fmt(weak, "%.2f"));
    }
    return out;
}

// Every DAG over three labelled nodes.
std::vector<std::vector<std::pair<NodeId, NodeId>>> all_three_node_dags() {
    const std::vector<std::pair<NodeId, NodeId>> pairs{{0, 1}, {0, 2}, {1, 2}};
    std::vector<std::vector<std::pair<NodeId, NodeId>>> out;
    for (int mask = 0; mask < 27; ++mask) {  // per pair: none, forward, backward
        std::vector<std::pair<NodeId, NodeId>> edges;
        int m = mask;
        for (auto [a, b] : pairs) {
            if (m % 3 == 1) edges.push_back({a, b});
            if (m % 3 == 2) edges.push_back({b, a});
            m /= 3;
        }
        std::vector<GraphNode> nodes{{0, "X"}, {1, "Y"}, {2, "Z"}};
        CausalGraph g(nodes);
        for (auto [s, t] : edges) g.add_edge(s, t);
        if (g.is_acyclic()) out.push_back(edges);
    }
    return out;
}

Outcome intervention_fidelity() {
    Outcome out;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(5);
    double worst_mc = 0.0, worst_nd = 0.0;
    std::size_t networks = 0, checks = 0;
    for (const auto& edges : all_three_node_dags()) {
        ++networks;
        auto ds = testing::random_binary_dataset(rng, 3, 400);
        auto model = fit_cpds(ds, graph_of(ds, edges));
        const auto& g = model.graph();
        for (int target = -1; target < 3; ++target) {
            for (Code v = 0; v < (target < 0 ? 1u : 2u); ++v) {
                InterventionSpec spec;
                spec.sample_count = tol::kMcSamples;
                spec.seed = rng();
                Overrides overrides(3);
                if (target >= 0) {
                    spec.assignments = {{static_cast<NodeId>(target), v}};
                    overrides[target] = std::vector<double>{v == 0 ? 1.0 : 0.0, v == 0 ? 0.0 : 1.0};
                }
                auto result = intervene(model, spec);
                auto truth = testing::oracle_enumerate(model, overrides);
                const auto desc = target >= 0 ? g.descendants(target) : std::vector<NodeId>{};
                for (std::size_t pos = 0; pos < 3; ++pos) {
                    worst_mc = std::max(worst_mc, testing::l1(result.dimensions[pos].estimated, truth[pos]));
                    ++checks;
                    const bool non_desc = target >= 0 && static_cast<int>(pos) != target &&
                                          !std::binary_search(desc.begin(), desc.end(), pos);
                    if (non_desc)
                        worst_nd = std::max(worst_nd, testing::l1(result.dimensions[pos].estimated,
                                                                  result.dimensions[pos].original));
                }
            }
        }
    }
    out.require(networks == 25, "25 three-node DAGs");
    out.require(worst_mc <= tol::kMcL1, "Monte Carlo vs enumeration");
    out.require(worst_nd <= tol::kNonDescendantL1, "non-descendant marginals");
    out.note(std::to_string(networks) + " networks, " + std::to_string(checks) + " marginals, max L1=" +
             fmt(worst_mc, "%.4f") + ", non-descendant max L1=" + fmt(worst_nd, "%.4f"));

    auto ds = ab_dataset();
    auto model = fit_cpds(ds, graph_of(ds, {{0, 1}}));
    auto result = intervene(model, {{{0, *ds.dictionary(0).find("1")}}, tol::kMcSamples, 11});
    const double b1 = result.dimensions[1].estimated[*ds.dictionary(1).find("1")];
    out.require(std::abs(b1 - tol::kDoB1) <= tol::kDoB1Tol, "d2_B(1) under do(A=1)");
    out.note("A->B d2_B(1)=" + fmt(b1, "%.4f"));
    const double secs = seconds_since(t0);
    out.require(secs < tol::kInterventionSeconds, "runtime");
    out.note(fmt(secs, "%.3f") + "s");
    return out;
}

Outcome attribution_fidelity() {
    Outcome out;
    auto ds = ab_dataset();
    const Code b1 = *ds.dictionary(1).find("1");
    auto exact_model = fit_cpds(ds, graph_of(ds, {{0, 1}}), 0.0);
    auto exact = attribute(exact_model, 1, b1);
    out.require(exact.exact && std::abs(exact.effects[0].effect - tol::kEffect) <= tol::kExactEffectTol,
                "exact path gives 0.8");
    AttributionOptions mc;
    mc.exact_state_limit = 0.0;
    mc.sample_count = tol::kMcSamples;
    auto sampled = attribute(fit_cpds(ds, graph_of(ds, {{0, 1}})), 1, b1, mc);
    out.require(std::abs(sampled.effects[0].effect - tol::kEffect) <= tol::kEffectTol, "Monte Carlo effect");
    out.note("exact=" + fmt(exact.effects[0].effect, "%.12f") + ", sampled=" + fmt(sampled.effects[0].effect, "%.4f"));

    std::mt19937_64 rng(6);
    std::size_t off_path = 0, nonzero = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto data = testing::random_binary_dataset(rng, 6, 300);
        auto g = discover(data, {});
        auto model = fit_cpds(data, g);
        for (const auto& n : g.nodes()) {
            for (const auto& e : attribute(model, n.id, 0).effects) {
                if (e.on_path) continue;
                ++off_path;
                nonzero += e.effect != 0.0;
            }
        }
    }
    out.require(nonzero == 0, "out-of-path effects exactly 0");
    out.note(std::to_string(off_path) + " out-of-path effects all 0");

    auto audiology = load_audiology();
    auto model = fit_cpds(audiology, discover(audiology, {}));
    const auto target = audiology.column_id("class");
    auto result = attribute(model, target, *audiology.dictionary(target).find("cochlear_unknown"));
    const NodeEffect* top = nullptr;
    for (const auto& e : result.effects)
        if (!top || e.effect > top->effect) top = &e;
    const std::string top_name = top ? audiology.name(top->node) : "(none)";
    out.require(top_name == "noise", "audiology top effect is noise");
    out.note("audiology top=" + top_name + " (" + fmt(top ? top->effect : 0.0, "%.4f") + ")");
    return out;
}

std::string layout_violations(const CausalGraph& g, double& worst_secs) {
    const auto t0 = Clock::now();
    auto layout = build_layout(g);
    worst_secs = std::max(worst_secs, seconds_since(t0));
    auto contracted = aggregate_chains(g).graph;
    std::map<NodeId, const LayoutNode*> by_id;
    for (const auto& n : layout.nodes) by_id[n.id] = &n;
    for (const auto& e : layout.drawn_edges)
        if (by_id[e.target]->layer - by_id[e.source]->layer != 1) return "drawn edge spans more than one layer";
    std::set<std::pair<NodeId, NodeId>> all;
    for (const auto& e : layout.drawn_edges) all.insert({e.source, e.target});
    for (const auto& e : layout.hidden_edges)
        if (!all.insert({e.source, e.target}).second) return "edge both drawn and hidden";
    std::set<std::pair<NodeId, NodeId>> expected;
    for (const auto& e : contracted.edges()) expected.insert({e.source, e.target});
    if (all != expected) return "hidden + drawn != E";
    std::map<std::pair<int, int>, const LayoutNode*> slots;
    for (const auto& n : layout.nodes) slots[{n.layer, n.order_in_layer}] = &n;
    int layer = -1;
    bool non_leaf = false;
    for (const auto& [slot, n] : slots) {
        if (slot.first != layer) {
            layer = slot.first;
            non_leaf = false;
        }
        if (n->role != NodeRole::Leaf) non_leaf = true;
        else if (non_leaf) return "leaf after non-leaf";
    }
    const auto counted = testing::oracle_crossings(layout);
    if (counted != layout.crossings) return "crossing count disagrees with oracle";
    // Baseline: the barycenter order before swaps, recounted by the oracle.
    auto baseline = build_layout(g, {true, 0});
    if (testing::oracle_crossings(baseline) != layout.initial_crossings) return "baseline mismatch";
    if (counted > testing::oracle_crossings(baseline)) return "ordering increased crossings";
    return "";
}

Outcome layout_invariants() {
    Outcome out;
    double worst = 0.0;
    std::size_t graphs = 0, failures = 0;
    std::string first;
    auto check = [&](const CausalGraph& g) {
        ++graphs;
        auto why = layout_violations(g, worst);
        if (!why.empty()) {
            ++failures;
            if (first.empty()) first = why;
        }
    };
    auto audiology = load_audiology();
    check(discover(audiology, {}));
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 100)(rng);
        const auto m = std::uniform_int_distribution<std::size_t>(0, 200)(rng);
        check(testing::random_dag(rng, n, m));
    }
    out.require(failures == 0, std::to_string(failures) + " graphs violate invariants (" + first + ")");
    out.require(worst < tol::kLayoutSeconds, "per-graph runtime");
    out.note(std::to_string(graphs) + " graphs, slowest layout " + fmt(worst * 1e3, "%.2f") + "ms");
    return out;
}

int run(const std::string& args) {
    const int status = std::system((std::string(WHATIF_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Outcome end_to_end_determinism() {
    Outcome out;
    const std::string data = WHATIF_DATA_DIR "/audiology.csv";
    const auto root = fs::temp_directory_path() / ("whatif-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    for (const char* runid : {"1", "2"}) {
        const auto d = root / runid;
        fs::create_directories(d);
        const auto g = (d / "graph.json").string();
        const bool ok =
            run("discover --data " + data + " --out " + g) == 0 &&
            run("layout --graph " + g + " --data " + data + " --out " + (d / "layout.json").string()) == 0 &&
            run("intervene --graph " + g + " --data " + data + " --set noise=t --samples 20000 --seed 7 --out " +
                (d / "intervene.json").string()) == 0 &&
            run("attribute --graph " + g + " --data " + data + " --target class=cochlear_unknown --seed 7 --out " +
                (d / "attribute.json").string()) == 0;
        out.require(ok, std::string("run ") + runid + " exited nonzero");
    }
    std::size_t same = 0;
    for (const char* name : {"graph.json", "layout.json", "intervene.json", "attribute.json"}) {
        const auto a = slurp(root / "1" / name), b = slurp(root / "2" / name);
        out.require(!a.empty() && a == b, std::string(name) + " differs");
        same += !a.empty() && a == b;
    }
    out.note(std::to_string(same) + "/4 documents byte-identical");
    fs::remove_all(root);
    return out;
}

// 32 categorical columns (2-4 values) sampled from a random sparse network.
Dataset scale_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> card(cols);
    std::vector<std::vector<std::size_t>> parents(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        card[c] = 2 + rng() % 3;
        for (std::size_t p = 0; p < c && parents[c].size() < 2; ++p)
            if (u(rng) < 2.0 / static_cast<double>(c + 1)) parents[c].push_back(p);
    }
    // Each parent configuration favours one value.
    std::vector<std::vector<std::size_t>> favourite(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t q = 1;
        for (auto p : parents[c]) q *= card[p];
        for (std::size_t j = 0; j < q; ++j) favourite[c].push_back(rng() % card[c]);
    }
    std::ostringstream text;
    for (std::size_t c = 0; c < cols; ++c) text << (c ? "," : "") << "c" << c;
    text << "\n";
    std::vector<std::size_t> row(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t j = 0;
            for (auto p : parents[c]) j = j * card[p] + row[p];
            row[c] = u(rng) < 0.7 ? favourite[c][j] : rng() % card[c];
            text << (c ? "," : "") << "v" << row[c];
        }
        text << "\n";
    }
    return ingest_text(text.str(), {});
}

Outcome desk_scale() {
    Outcome out;
    auto ds = scale_dataset(10000, 32, 9);
    auto t0 = Clock::now();
    auto parallel = discover(ds, {}, std::nullopt, {tol::kScaleThreads});
    const double par_secs = seconds_since(t0);
    t0 = Clock::now();
    auto serial = discover(ds, {}, std::nullopt, {1});
    const double ser_secs = seconds_since(t0);
    bool same = parallel.trace.size() == serial.trace.size() && parallel.score == serial.score;
    for (std::size_t i = 0; same && i < serial.trace.size(); ++i)
        same = parallel.trace[i].source == serial.trace[i].source && parallel.trace[i].target == serial.trace[i].target &&
               parallel.trace[i].kind == serial.trace[i].kind && parallel.trace[i].delta == serial.trace[i].delta;
    out.require(same, "parallel and serial graphs differ");
    out.require(par_secs < tol::kScaleSeconds, "parallel runtime");
    out.note(std::to_string(parallel.edge_count()) + " edges, " + std::to_string(parallel.trace.size()) +
             " moves; " + std::to_string(tol::kScaleThreads) + " threads " + fmt(par_secs, "%.2f") + "s, 1 thread " +
             fmt(ser_secs, "%.2f") + "s, " + std::to_string(std::thread::hardware_concurrency()) + " cores");
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 score correctness", score_correctness},
        {"2 greedy soundness", greedy_soundness},
        {"3 structure recovery", structure_recovery},
        {"4 uncertainty positivity", uncertainty_positivity},
        {"5 intervention fidelity", intervention_fidelity},
        {"6 attribution fidelity", attribution_fidelity},
        {"7 layout invariants", layout_invariants},
        {"8 end-to-end determinism", end_to_end_determinism},
        {"9 desk-scale throughput", desk_scale},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }

    // Informational: root count of the audiology graph.
    auto audiology = load_audiology();
    auto g = discover(audiology, {});
    std::size_t roots = 0;
    for (const auto& n : g.nodes()) roots += g.parents(n.id).empty() && !g.children(n.id).empty();
    std::cout << "INFO audiology graph: " << g.edge_count() << " edges, " << roots << " root causes" << std::endl;

    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}
