#include "cli.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "spreader_gnn/data_io.hpp"
#include "spreader_gnn/error.hpp"
#include "spreader_gnn/graph.hpp"
#include "spreader_gnn/models.hpp"
#include "spreader_gnn/parallel.hpp"
#include "spreader_gnn/trainer.hpp"

namespace spreader_gnn::cli {

namespace {

namespace fs = std::filesystem;
using models::Architecture;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct TrainFlags {
    std::string model = "gcn";
    std::string preset = "default";
    training::TrainConfig cfg;
    bool verbose = false;
};

void add_train_flags(CLI::App& cmd, TrainFlags& f, bool with_model) {
    if (with_model) {
        cmd.add_option("--model", f.model, "Model to train: gcn, sage or dgcnn")
            ->check(CLI::IsMember({"gcn", "sage", "dgcnn"}))
            ->capture_default_str();
    }
    cmd.add_option("--seed", f.cfg.seed, "Seed for split, initialization, dropout and shuffling")->capture_default_str();
    cmd.add_option("--epochs", f.cfg.epochs, "Training epochs")->capture_default_str();
    cmd.add_option("--lr", f.cfg.lr, "Adam learning rate (the reference preset uses 1e-05 unless --lr is given)")
        ->capture_default_str();
    cmd.add_option("--dropout", f.cfg.dropout, "Dropout probability")->capture_default_str();
    cmd.add_option("--hidden", f.cfg.hidden_dim, "Hidden dimension of every graph layer")->capture_default_str();
    cmd.add_option("--split-ratio", f.cfg.split_ratio, "Fraction of each class used for training")
        ->capture_default_str();
    cmd.add_option("--sortpool-k", f.cfg.sortpool_k, "DGCNN SortPooling size; 0 picks the 0.6-quantile of ego sizes")
        ->capture_default_str();
    cmd.add_option("--hops", f.cfg.hops, "Ego-network radius for DGCNN samples")->capture_default_str();
    cmd.add_option("--neighbor-cap", f.cfg.neighbor_cap, "GraphSAGE neighbours sampled per layer; 0 uses all")
        ->capture_default_str();
    cmd.add_option("--preset", f.preset, "Hyperparameter preset: default or reference")
        ->check(CLI::IsMember({"default", "reference"}))
        ->capture_default_str();
    cmd.add_flag("--verbose", f.verbose, "Print per-epoch progress to stderr");
}

void apply_preset(TrainFlags& f, const CLI::App& cmd) {
    if (f.preset == "reference" && cmd.count("--lr") == 0) {
        f.cfg.lr = training::kReferenceLearningRate;
    }
}

// Labelled nodes, their labels and the shared stratified split.
struct Prepared {
    io::Dataset data;
    std::vector<graph::NodeId> labeled;
    training::Split split;
    std::vector<graph::NodeId> train_nodes;
    std::vector<graph::NodeId> test_nodes;
};

Prepared prepare(const fs::path& dir, double split_ratio, std::uint64_t seed) {
    Prepared p;
    p.data = io::load_dataset(dir);
    p.labeled = p.data.table.labeled_nodes();
    if (p.labeled.empty()) {
        throw DataError("no labeled nodes in " + dir.string());
    }
    const auto labels = p.data.table.binary_labels(p.labeled);
    p.split = training::stratified_split(labels, split_ratio, seed);
    for (const auto i : p.split.train) {
        p.train_nodes.push_back(p.labeled[i]);
    }
    for (const auto i : p.split.test) {
        p.test_nodes.push_back(p.labeled[i]);
    }
    return p;
}

struct Trained {
    training::TrainResult result;
    metrics::MetricsRecord test;
};

Trained train_and_evaluate(const Prepared& p, const std::vector<models::EgoSample>& samples,
                           const training::TrainConfig& cfg) {
    Trained t;
    if (cfg.model == Architecture::dgcnn) {
        t.result = training::train(samples, p.split.train, cfg);
        t.test = training::evaluate(t.result.params, samples, p.split.test);
    } else {
        t.result = training::train(p.data.graph, p.data.table, p.train_nodes, cfg);
        t.test = training::evaluate(t.result.params, p.data.graph, p.data.table, p.test_nodes, cfg.neighbor_cap);
    }
    t.result.history.test_metrics = t.test;
    return t;
}

void report_epochs(const training::TrainHistory& h, std::string_view model, std::ostream& err) {
    for (const auto& e : h.epochs) {
        err << model << " epoch " << e.epoch << " loss " << io::format_double(e.train_loss) << " train_acc "
            << io::format_double(e.train_accuracy) << '\n';
    }
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string comparison_table(const std::array<std::pair<std::string, metrics::MetricsRecord>, 3>& rows) {
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof(line), "%-8s %9s %9s %9s\n", "model", "accuracy", "mcc", "roc_auc");
    os << line;
    for (const auto& [name, rec] : rows) {
        const std::string auc = rec.roc_auc ? fixed4(*rec.roc_auc) : "n/a";
        std::snprintf(line, sizeof(line), "%-8s %9s %9s %9s\n", name.c_str(), fixed4(rec.accuracy).c_str(),
                      fixed4(rec.mcc).c_str(), auc.c_str());
        os << line;
    }
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
}

int cmd_generate(const io::SynthConfig& cfg, const fs::path& out_dir, std::ostream& out) {
    const auto data = io::generate_synthetic(cfg);
    io::save_dataset(data, out_dir);
    const auto labeled = data.table.labeled_nodes();
    out << "nodes " << data.table.n_nodes() << '\n'
        << "edges " << data.graph.n_undirected_edges() << '\n'
        << "labeled " << labeled.size() << '\n';
    return 0;
}

struct EgoFlags {
    fs::path data = "data";
    std::int64_t root = -1;
    std::size_t hops = 3;
    std::string out;
};

int cmd_ego(const EgoFlags& f, std::ostream& out) {
    const auto data = io::load_dataset(f.data);
    std::ostringstream text;
    if (f.root < 0) {
        text << "node,label,nodes,edges\n";
        for (const auto v : data.table.labeled_nodes()) {
            const auto ego = graph::extract_ego(data.graph, v, f.hops);
            text << v << ',' << (data.table.labels[v] == Label::spreader ? 1 : 0) << ',' << ego.nodes.size() << ','
                 << ego.graph.n_undirected_edges() << '\n';
        }
    } else {
        const auto root = static_cast<graph::NodeId>(f.root);
        const auto ego = graph::extract_ego(data.graph, root, f.hops);
        text << "local,node,hop\n";
        for (std::size_t i = 0; i < ego.nodes.size(); ++i) {
            text << i << ',' << ego.nodes[i] << ',' << ego.hops[i] << '\n';
        }
        if (!f.out.empty()) {
            // Subgraph as a dataset directory in local ids, plus the id map.
            io::Dataset sub;
            sub.graph = ego.graph;
            sub.table.features = Tensor(ego.nodes.size(), data.table.feature_dim());
            sub.table.labels.assign(ego.nodes.size(), Label::unlabeled);
            for (std::size_t i = 0; i < ego.nodes.size(); ++i) {
                const auto src = data.table.features.row(ego.nodes[i]);
                std::copy(src.begin(), src.end(), sub.table.features.row(i).begin());
                sub.table.labels[i] = data.table.labels[ego.nodes[i]];
            }
            io::save_dataset(sub, f.out);
            write_text(fs::path(f.out) / "nodes.csv", text.str());
            out << "nodes " << ego.nodes.size() << '\n' << "edges " << ego.graph.n_undirected_edges() << '\n';
            return 0;
        }
    }
    if (f.out.empty()) {
        out << text.str();
    } else {
        write_text(f.out, text.str());
    }
    return 0;
}

int cmd_train(TrainFlags& f, const fs::path& data_dir, std::string ckpt, std::string history, std::ostream& out,
              std::ostream& err) {
    f.cfg.model = models::parse_architecture(f.model);
    f.cfg.validate();
    const auto p = prepare(data_dir, f.cfg.split_ratio, f.cfg.seed);
    std::vector<models::EgoSample> samples;
    if (f.cfg.model == Architecture::dgcnn) {
        samples = models::node_to_graph_dataset(p.data.graph, p.data.table, p.labeled, f.cfg.hops, worker_count());
    }
    const auto t = train_and_evaluate(p, samples, f.cfg);
    if (ckpt.empty()) {
        ckpt = f.model + ".ckpt";
    }
    if (history.empty()) {
        history = ckpt + ".history.csv";
    }
    io::save_checkpoint(t.result.params, ckpt);
    io::write_history(t.result.history, history);
    if (f.verbose) {
        report_epochs(t.result.history, f.model, err);
    }
    const auto& last = t.result.history.epochs.back();
    out << "model " << f.model << '\n'
        << "epochs " << last.epoch << '\n'
        << "final_loss " << io::format_double(last.train_loss) << '\n'
        << "train_accuracy " << io::format_double(last.train_accuracy) << '\n'
        << "checkpoint " << ckpt << '\n'
        << "history " << history << '\n';
    return 0;
}

struct EvalFlags {
    fs::path data = "data";
    std::string checkpoint;
    std::string model;
    std::uint64_t seed = 0;
    double split_ratio = 0.8;
    std::size_t hops = 3;
    std::size_t neighbor_cap = 0;
    std::string out = "metrics.json";
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
    auto params = io::load_checkpoint(f.checkpoint);
    if (!f.model.empty() && models::parse_architecture(f.model) != params.arch) {
        throw IncompatibilityError("checkpoint " + f.checkpoint + " holds a " + std::string(to_string(params.arch)) +
                                   " model, not " + f.model);
    }
    const auto p = prepare(f.data, f.split_ratio, f.seed);
    if (params.input_dim != p.data.table.feature_dim()) {
        throw IncompatibilityError("checkpoint expects " + std::to_string(params.input_dim) +
                                   " features, dataset has " + std::to_string(p.data.table.feature_dim()));
    }
    metrics::MetricsRecord rec;
    if (params.arch == Architecture::dgcnn) {
        const auto samples =
            models::node_to_graph_dataset(p.data.graph, p.data.table, p.labeled, f.hops, worker_count());
        rec = training::evaluate(params, samples, p.split.test);
    } else {
        rec = training::evaluate(params, p.data.graph, p.data.table, p.test_nodes, f.neighbor_cap);
    }
    const std::string model(to_string(params.arch));
    io::write_metrics(rec, model, f.seed, f.out);
    out << io::metrics_json(rec, model, f.seed);
    return 0;
}

int cmd_run_all(TrainFlags& f, const fs::path& data_dir, const fs::path& out_dir, std::ostream& out,
                std::ostream& err) {
    f.cfg.validate();
    const auto p = prepare(data_dir, f.cfg.split_ratio, f.cfg.seed);
    const std::size_t workers = worker_count();
    const auto samples = models::node_to_graph_dataset(p.data.graph, p.data.table, p.labeled, f.cfg.hops, workers);

    constexpr std::array<Architecture, 3> order{Architecture::gcn, Architecture::sage, Architecture::dgcnn};
    std::array<Trained, 3> results;
    parallel_for(order.size(), workers, [&](std::size_t i) {
        training::TrainConfig cfg = f.cfg;
        cfg.model = order[i];
        results[i] = train_and_evaluate(p, samples, cfg);
    });

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    std::array<std::pair<std::string, metrics::MetricsRecord>, 3> rows;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string name(to_string(order[i]));
        io::write_metrics(results[i].test, name, f.cfg.seed, out_dir / (name + ".metrics.json"));
        io::save_checkpoint(results[i].result.params, out_dir / (name + ".ckpt"));
        io::write_history(results[i].result.history, out_dir / (name + ".history.csv"));
        if (f.verbose) {
            report_epochs(results[i].result.history, name, err);
        }
        rows[i] = {name, results[i].test};
    }
    const std::string table = comparison_table(rows);
    write_text(out_dir / "table.txt", table);
    out << table;
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Graph neural network toolkit for misinformation-spreader classification", "spreader-gnn"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    io::SynthConfig synth;
    std::string gen_out = "data";
    auto* gen = app.add_subcommand("generate", "Write a synthetic labelled graph dataset");
    gen->add_option("--n", synth.n_nodes, "Number of nodes")->capture_default_str();
    gen->add_option("--spreader-fraction", synth.spreader_fraction, "Fraction of nodes that are spreaders")
        ->capture_default_str();
    gen->add_option("--feature-dim", synth.feature_dim, "Feature dimension")->capture_default_str();
    gen->add_option("--shift", synth.feature_shift, "Per-class feature mean offset (+shift / -shift)")
        ->capture_default_str();
    gen->add_option("--p-intra", synth.p_intra, "Edge probability within a class")->capture_default_str();
    gen->add_option("--p-inter", synth.p_inter, "Edge probability across classes")->capture_default_str();
    gen->add_option("--hub-boost", synth.hub_boost, "Extra edge probability for pairs touching a spreader")
        ->capture_default_str();
    gen->add_option("--label-fraction", synth.label_fraction, "Fraction of each class that is labelled")
        ->capture_default_str();
    gen->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output dataset directory")->capture_default_str();

    EgoFlags ego_flags;
    std::string ego_data = "data";
    auto* ego = app.add_subcommand("ego", "Inspect k-hop ego networks");
    ego->add_option("--data", ego_data, "Dataset directory")->capture_default_str();
    ego->add_option("--root", ego_flags.root, "Root node; -1 summarizes every labelled node")->capture_default_str();
    ego->add_option("--hops", ego_flags.hops, "Ego-network radius")->capture_default_str();
    ego->add_option("--out", ego_flags.out,
                    "Output path; with --root a dataset directory for the subgraph, otherwise a CSV file "
                    "(default: stdout)");

    TrainFlags train_flags;
    std::string train_data = "data";
    std::string train_ckpt;
    std::string train_history;
    auto* train = app.add_subcommand("train", "Train one model and write a checkpoint and history");
    train->add_option("--data", train_data, "Dataset directory")->capture_default_str();
    add_train_flags(*train, train_flags, true);
    train->add_option("--out", train_ckpt, "Checkpoint path (default: <model>.ckpt)");
    train->add_option("--history", train_history, "Per-epoch CSV path (default: <checkpoint>.history.csv)");

    EvalFlags eval_flags;
    std::string eval_data = "data";
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
    eval->add_option("--data", eval_data, "Dataset directory")->capture_default_str();
    eval->add_option("--checkpoint", eval_flags.checkpoint, "Checkpoint written by train")->required();
    eval->add_option("--model", eval_flags.model, "Expected model tag; rejected if the checkpoint differs")
        ->check(CLI::IsMember({"gcn", "sage", "dgcnn"}));
    eval->add_option("--seed", eval_flags.seed, "Seed of the split used in training")->capture_default_str();
    eval->add_option("--split-ratio", eval_flags.split_ratio, "Train fraction used in training")
        ->capture_default_str();
    eval->add_option("--hops", eval_flags.hops, "Ego-network radius for DGCNN samples")->capture_default_str();
    eval->add_option("--neighbor-cap", eval_flags.neighbor_cap, "GraphSAGE neighbour cap used in training")
        ->capture_default_str();
    eval->add_option("--out", eval_flags.out, "Metrics JSON path")->capture_default_str();

    TrainFlags all_flags;
    std::string all_data = "data";
    std::string all_out = "results";
    auto* all = app.add_subcommand("run-all", "Train and evaluate gcn, sage and dgcnn on one shared split");
    all->add_option("--data", all_data, "Dataset directory")->capture_default_str();
    add_train_flags(*all, all_flags, false);
    all->add_option("--out", all_out, "Output directory for metrics, checkpoints and histories")
        ->capture_default_str();

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("spreader-gnn");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen) {
            return cmd_generate(synth, gen_out, out);
        }
        if (*ego) {
            ego_flags.data = ego_data;
            return cmd_ego(ego_flags, out);
        }
        if (*train) {
            apply_preset(train_flags, *train);
            return cmd_train(train_flags, train_data, train_ckpt, train_history, out, err);
        }
        if (*eval) {
            eval_flags.data = eval_data;
            return cmd_eval(eval_flags, out);
        }
        if (*all) {
            apply_preset(all_flags, *all);
            return cmd_run_all(all_flags, all_data, all_out, out, err);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace spreader_gnn::cli
