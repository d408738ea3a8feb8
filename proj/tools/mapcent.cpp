// mapcent command-line driver.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <mapcent/mapcent.hpp>

using namespace mapcent;
using nlohmann::json;

namespace {

/// Bad arguments or unreadable/unwritable files; exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string input;
    bool directed = false;
    std::string flow = "raw";
    double teleport_rate = 0.15;
    std::string convention = "with-exit";
    std::vector<std::string> methods{"mec"};
    std::string output;
    std::string format = "csv";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::size_t runs = 100;
    std::string partition;
    bool detect = false;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, input, directed, flow, teleport_rate, convention, methods,
                                                output, format, seed, threads, runs, partition, detect)

std::string num(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
    return std::string(buf, end);
}

/// "a:b:s" with both endpoints included, or a single value.
std::vector<double> parse_range(const std::string &spec) {
    auto parse = [&](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw UsageError("bad number '" + std::string(s) + "' in range '" + spec + "'");
        return v;
    };
    std::vector<std::string_view> parts;
    std::string_view rest = spec;
    for (;;) {
        const auto colon = rest.find(':');
        parts.push_back(rest.substr(0, colon));
        if (colon == std::string_view::npos)
            break;
        rest.remove_prefix(colon + 1);
    }
    if (parts.size() == 1)
        return {parse(parts[0])};
    if (parts.size() != 3)
        throw UsageError("range must look like start:stop:step, got '" + spec + "'");
    const double a = parse(parts[0]), b = parse(parts[1]), s = parse(parts[2]);
    if (!(s > 0.0) || b < a)
        throw UsageError("range needs start <= stop and a positive step: '" + spec + "'");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = a + static_cast<double>(i) * s;
    return out;
}

std::ifstream open_in(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open '" + path + "'");
    return in;
}

/// Output sink: the configured file, or stdout.
class Sink {
  public:
    explicit Sink(const std::string &path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw UsageError("cannot write '" + path + "'");
        }
    }
    std::ostream &out() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

/// Lazily built graph, flow and partition shared by the commands.
class Context {
  public:
    explicit Context(RunConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.input.empty())
            throw UsageError("--input is required");
        auto in = open_in(cfg_.input);
        graph_ = parse_edge_list(in, cfg_.directed);
    }

    const RunConfig &cfg() const { return cfg_; }
    const Graph &graph() const { return graph_; }

    const FlowField &flow() {
        if (!flow_)
            flow_ = compute_flow(graph_, parse_flow_model(cfg_.flow), cfg_.teleport_rate);
        return *flow_;
    }

    SearchConfig search() const {
        SearchConfig s;
        s.num_runs = cfg_.runs;
        s.seed = cfg_.seed;
        s.threads = cfg_.threads;
        return s;
    }

    const Partition &partition() {
        if (partition_)
            return *partition_;
        if (!cfg_.partition.empty()) {
            auto in = open_in(cfg_.partition);
            partition_ = parse_partition(in, graph_);
        } else if (cfg_.detect) {
            partition_ = optimize_two_level(graph_, flow(), search()).partition;
        } else {
            throw UsageError("this method needs --partition FILE or --detect");
        }
        return *partition_;
    }

    /// Scores of one method plus the flow label reported next to them.
    std::pair<std::vector<double>, std::string> scores(const std::string &method) {
        const auto &g = graph_;
        if (method == "mec") {
            const auto pf = aggregate_partition_flows(flow(), partition(), parse_convention(cfg_.convention));
            return {mec_all(pf).scores, std::string(to_string(flow().model))};
        }
        if (method == "dc")
            return {degree_centrality(g).scores, "none"};
        if (method == "bc")
            return {betweenness_centrality(g, cfg_.threads).scores, "none"};
        if (method == "pr")
            return {pagerank(g, cfg_.teleport_rate).scores, "node-teleport"};
        if (method == "mv")
            return {modularity_vitality(g, partition()).scores, "none"};
        if (method == "chb")
            return {community_hub_bridge(g, partition()).scores, "none"};
        if (method == "cbc")
            return {community_based_centrality(g, partition()).scores, "none"};
        throw UsageError("unknown method '" + method + "' (mec, dc, bc, pr, mv, chb, cbc)");
    }

  private:
    RunConfig cfg_;
    Graph graph_;
    std::optional<FlowField> flow_;
    std::optional<Partition> partition_;
};

/// One sweep row in CSV or JSON-lines form.
void emit_row(std::ostream &out, const std::string &format, const std::string &method, const std::string &flow,
              double x, double value) {
    if (format == "json")
        out << json{{"method", method}, {"flow", flow}, {"x", x}, {"value", value}}.dump() << '\n';
    else
        out << method << ',' << flow << ',' << num(x) << ',' << num(value) << '\n';
}

/// Options common to every subcommand. Values land in `cli`; the names of
/// the options that were actually given decide what overrides the config file.
struct CommonOptions {
    RunConfig cli;
    std::string config_path;
    bool dump_config = false;
    std::vector<std::pair<CLI::Option *, std::function<void(RunConfig &)>>> overrides;

    void attach(CLI::App &sub) {
        auto bind = [&](CLI::Option *opt, auto member) {
            overrides.emplace_back(opt, [this, member](RunConfig &c) { c.*member = cli.*member; });
        };
        bind(sub.add_option("-i,--input", cli.input, "edge list file"), &RunConfig::input);
        bind(sub.add_flag("--directed", cli.directed, "treat links as directed"), &RunConfig::directed);
        bind(sub.add_option("--flow", cli.flow, "raw | link-teleport | node-teleport"), &RunConfig::flow);
        bind(sub.add_option("--teleport-rate", cli.teleport_rate, "teleportation rate tau"),
             &RunConfig::teleport_rate);
        bind(sub.add_option("--convention", cli.convention, "with-exit | node-flow"), &RunConfig::convention);
        bind(sub.add_option("--method", cli.methods, "mec dc bc pr mv chb cbc (repeatable, comma separated)")
                 ->delimiter(','),
             &RunConfig::methods);
        bind(sub.add_option("-o,--output", cli.output, "output file (default stdout)"), &RunConfig::output);
        bind(sub.add_option("--format", cli.format, "csv | json")->check(CLI::IsMember({"csv", "json"})),
             &RunConfig::format);
        bind(sub.add_option("--seed", cli.seed, "global seed"), &RunConfig::seed);
        bind(sub.add_option("--threads", cli.threads, "worker threads (0: MAPCENT_THREADS or all cores)"),
             &RunConfig::threads);
        bind(sub.add_option("--runs", cli.runs, "seeded search runs"), &RunConfig::runs);
        bind(sub.add_option("--partition", cli.partition, "partition file"), &RunConfig::partition);
        bind(sub.add_flag("--detect", cli.detect, "detect modules instead of reading a partition"),
             &RunConfig::detect);
        sub.add_option("--config", config_path, "JSON run configuration; explicit options override it");
        sub.add_flag("--dump-config", dump_config, "print the effective configuration as JSON and exit");
    }

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) {
            auto in = open_in(config_path);
            try {
                cfg = json::parse(in).get<RunConfig>();
            } catch (const json::exception &e) {
                throw UsageError("bad config '" + config_path + "': " + e.what());
            }
        }
        for (const auto &[opt, apply] : overrides)
            if (opt->count() > 0)
                apply(cfg);
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// Commands

void cmd_partition(Context &ctx, const std::string &summary_path) {
    const auto res = optimize_two_level(ctx.graph(), ctx.flow(), ctx.search());
    Sink sink(ctx.cfg().output);
    write_partition(sink.out(), ctx.graph(), res.partition);
    json summary{{"codelength", res.codelength},
                 {"num_modules", res.partition.num_leaf_modules()},
                 {"effective_modules", effective_num_modules(res.partition)},
                 {"mixing", ctx.graph().num_links() ? mixing(ctx.graph(), res.partition) : 0.0}};
    if (!summary_path.empty()) {
        Sink s(summary_path);
        s.out() << summary.dump() << '\n';
    } else if (ctx.cfg().output.empty()) {
        std::cerr << summary.dump() << '\n';
    } else {
        std::cout << summary.dump() << '\n';
    }
}

void cmd_centrality(Context &ctx) {
    const auto &cfg = ctx.cfg();
    if (cfg.methods.size() != 1)
        throw UsageError("centrality takes exactly one --method");
    const auto [scores, flow] = ctx.scores(cfg.methods.front());
    Sink sink(cfg.output);
    auto &out = sink.out();
    const auto order = ranking(scores);
    if (cfg.format == "json") {
        for (auto u : order)
            out << json{{"node", ctx.graph().label(u)}, {"score", scores[u]}}.dump() << '\n';
        return;
    }
    out << "node,score\n";
    for (auto u : order)
        out << ctx.graph().label(u) << ',' << num(scores[u]) << '\n';
}

std::vector<double> spreading_powers(Context &ctx, const std::string &p_spec, std::size_t reps) {
    SirConfig sir;
    sir.repetitions = reps;
    sir.seed = ctx.cfg().seed;
    sir.threads = ctx.cfg().threads;
    if (p_spec == "auto") {
        sir.infection_probability = epidemic_threshold(ctx.graph());
    } else {
        const auto v = parse_range(p_spec);
        if (v.size() != 1)
            throw UsageError("--p takes 'auto' or a single value");
        sir.infection_probability = v.front();
    }
    return sir_spreading_powers(ctx.graph(), sir);
}

std::vector<double> read_powers(Context &ctx, const std::string &path) {
    auto in = open_in(path);
    const auto &g = ctx.graph();
    std::vector<double> power(g.num_nodes(), std::nan(""));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "node,power")
            continue;
        const auto comma = line.find(',');
        const auto id = g.find(line.substr(0, comma));
        const auto value = comma == std::string::npos ? std::nullopt : detail::parse_double(line.substr(comma + 1));
        if (!id || !value)
            throw ParseError("expected 'node,power' with a known node", lineno);
        power[*id] = *value;
    }
    for (double p : power)
        if (std::isnan(p))
            throw ValidationError("power file does not cover every node");
    return power;
}

struct SweepOptions {
    std::string metric = "lt";
    double threshold = 0.5;
    std::string fractions = "0.01:0.2:0.01";
    std::string lt_direction = "in";
    std::string p = "auto";
    std::size_t reps = 1000;
    std::string powers;
};

void cmd_sweep(Context &ctx, const SweepOptions &opt) {
    const auto &cfg = ctx.cfg();
    const auto xs = parse_range(opt.fractions);
    const auto n = ctx.graph().num_nodes();
    std::vector<double> power;
    if (opt.metric == "sir-imprecision")
        power = opt.powers.empty() ? spreading_powers(ctx, opt.p, opt.reps) : read_powers(ctx, opt.powers);
    else if (opt.metric != "lt" && opt.metric != "perplexity")
        throw UsageError("unknown metric '" + opt.metric + "' (lt, sir-imprecision, perplexity)");
    const auto direction = opt.lt_direction == "out" ? LtDirection::out_neighbors : LtDirection::in_neighbors;

    Sink sink(cfg.output);
    auto &out = sink.out();
    if (cfg.format == "csv")
        out << "method,flow,x,value\n";
    for (const auto &method : cfg.methods) {
        // "sir" ranks by the spreading powers themselves: the ideal ranking.
        const auto [scores, flow] =
            method == "sir" && !power.empty() ? std::pair(power, std::string("none")) : ctx.scores(method);
        const auto order = ranking(scores);
        for (double x : xs) {
            const auto k = top_count(x, n);
            const std::span<const NodeId> top(order.data(), k);
            double value = 0.0;
            if (opt.metric == "lt")
                value = linear_threshold(ctx.graph(), top, opt.threshold, direction).value;
            else if (opt.metric == "sir-imprecision")
                value = imprecision(order, power, x);
            else
                value = selection_perplexity(ctx.partition(), top);
            emit_row(out, cfg.format, method, flow, x, value);
        }
    }
}

void cmd_sir(Context &ctx, const SweepOptions &opt) {
    const auto power = spreading_powers(ctx, opt.p, opt.reps);
    Sink sink(ctx.cfg().output);
    auto &out = sink.out();
    out << "node,power\n";
    for (NodeId u = 0; u < power.size(); ++u)
        out << ctx.graph().label(u) << ',' << num(power[u]) << '\n';
}

struct RewireOptions {
    std::string truth;
    std::string r = "0:1:0.05";
    std::size_t repeats = 100;
    std::string model = "uniform";
};

void cmd_rewire(Context &ctx, const RewireOptions &opt) {
    if (opt.truth.empty())
        throw UsageError("rewire-exp needs --truth FILE");
    auto in = open_in(opt.truth);
    const auto truth = parse_partition(in, ctx.graph());
    const auto rs = parse_range(opt.r);
    RewiringOptions ro;
    ro.flow = parse_flow_model(ctx.cfg().flow);
    ro.teleport_rate = ctx.cfg().teleport_rate;
    ro.convention = parse_convention(ctx.cfg().convention);
    ro.rewire_model = opt.model == "degree-preserving" ? RewireModel::degree_preserving : RewireModel::uniform;
    ro.threads = ctx.cfg().threads;
    const auto records = rewiring_experiment(ctx.graph(), truth, rs, opt.repeats, ctx.search(), ro);
    Sink sink(ctx.cfg().output);
    for (const auto &rec : records)
        sink.out() << json{{"r", rec.r},
                           {"ami", rec.ami},
                           {"tau", rec.tau},
                           {"mu", rec.mu},
                           {"num_modules", rec.num_modules},
                           {"effective_modules", rec.effective_modules},
                           {"repeats", rec.repeats}}
                          .dump()
                   << '\n';
}

void cmd_stats(Context &ctx) {
    const auto &g = ctx.graph();
    const auto s = degree_stats(g);
    json out{{"nodes", g.num_nodes()},
             {"links", g.num_links()},
             {"directed", g.directed()},
             {"total_weight", g.total_weight()},
             {"self_loops_dropped", g.self_loops_dropped()},
             {"mean_degree", s.mean_degree},
             {"mean_square_degree", s.mean_square_degree}};
    try {
        out["epidemic_threshold"] = epidemic_threshold(g);
    } catch (const std::exception &) {
        out["epidemic_threshold"] = nullptr;
    }
    Sink sink(ctx.cfg().output);
    sink.out() << out.dump() << '\n';
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Map equation centrality and comparison baselines"};
    app.require_subcommand(1);

    std::map<std::string, std::unique_ptr<CommonOptions>> common;
    auto add = [&](const std::string &name, const std::string &help) {
        auto *sub = app.add_subcommand(name, help);
        common[name] = std::make_unique<CommonOptions>();
        common[name]->attach(*sub);
        return sub;
    };

    std::string summary_path;
    add("partition", "detect a two-level partition")
        ->add_option("--summary", summary_path, "JSON summary file (default stdout, or stderr when writing the "
                                                "partition to stdout)");
    add("centrality", "score every node with one method");

    SweepOptions sweep;
    auto sweep_options = [&](CLI::App *sub, bool with_metric) {
        if (with_metric)
            sub->add_option("--metric", sweep.metric, "lt | sir-imprecision | perplexity");
        sub->add_option("--threshold", sweep.threshold, "linear threshold t");
        sub->add_option("--fractions", sweep.fractions, "seed fractions start:stop:step (inclusive)");
        sub->add_option("--lt-direction", sweep.lt_direction, "in | out (directed graphs)")
            ->check(CLI::IsMember({"in", "out"}));
        sub->add_option("--p", sweep.p, "infection probability or 'auto' for the epidemic threshold");
        sub->add_option("--reps", sweep.reps, "SIR repetitions per node");
        sub->add_option("--powers", sweep.powers, "precomputed 'node,power' CSV");
    };
    sweep_options(add("evaluate", "sweep seed fractions for one metric"), true);
    sweep_options(add("lt", "linear threshold activation sweep"), false);
    sweep_options(add("imprecision", "SIR imprecision sweep"), false);
    sweep_options(add("perplexity", "selection perplexity sweep"), false);
    sweep_options(add("sir", "SIR spreading power of every node"), false);

    RewireOptions rewire_opt;
    auto *rw = add("rewire-exp", "rewiring robustness experiment");
    rw->add_option("--truth", rewire_opt.truth, "ground-truth partition file");
    rw->add_option("--r", rewire_opt.r, "rewiring fractions start:stop:step (inclusive)");
    rw->add_option("--repeats", rewire_opt.repeats, "rewirings per fraction");
    rw->add_option("--rewire-model", rewire_opt.model, "uniform | degree-preserving")
        ->check(CLI::IsMember({"uniform", "degree-preserving"}));
    add("stats", "degree statistics and epidemic threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto *chosen = app.get_subcommands().front();
    const auto name = chosen->get_name();
    auto &opts = *common.at(name);
    try {
        const auto cfg = opts.resolve();
        if (opts.dump_config) {
            std::cout << json(cfg).dump(2) << '\n';
            return 0;
        }
        Context ctx(cfg);
        if (name == "partition")
            cmd_partition(ctx, summary_path);
        else if (name == "centrality")
            cmd_centrality(ctx);
        else if (name == "sir")
            cmd_sir(ctx, sweep);
        else if (name == "rewire-exp")
            cmd_rewire(ctx, rewire_opt);
        else if (name == "stats")
            cmd_stats(ctx);
        else {
            if (name == "lt")
                sweep.metric = "lt";
            else if (name == "imprecision")
                sweep.metric = "sir-imprecision";
            else if (name == "perplexity")
                sweep.metric = "perplexity";
            cmd_sweep(ctx, sweep);
        }
    } catch (const UsageError &e) {
        std::cerr << "mapcent: " << e.what() << '\n';
        return 2;
    } catch (const ParseError &e) {
        std::cerr << "mapcent: parse error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError &e) {
        std::cerr << "mapcent: invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "mapcent: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
