// charm: command-line front end for data generation, training, evaluation,
// low-level embedding analysis and hand-crafted feature export.
//
// Exit codes: 0 ok, 1 I/O, 2 configuration, 3 data, 4 checkpoint.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "charm/config.hpp"
#include "charm/dataset.hpp"
#include "charm/embed.hpp"
#include "charm/error.hpp"
#include "charm/features.hpp"
#include "charm/io.hpp"
#include "charm/kernels.hpp"
#include "charm/model.hpp"
#include "charm/synth.hpp"
#include "charm/traineval.hpp"

namespace {

using namespace charm;

enum Exit : int { kOk = 0, kIo = 1, kConfig = 2, kData = 3, kCheckpoint = 4 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io:
            return kIo;
        case ErrorKind::Config:
            return kConfig;
        case ErrorKind::Checkpoint:
            return kCheckpoint;
        case ErrorKind::Data:
        case ErrorKind::Shape:
        case ErrorKind::Argument:
            return kData;
    }
    return kIo;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
};

RunConfig resolve_config(const Common& c) {
    RunConfig rc = c.config.empty() ? default_run_config() : load_run_config(c.config);
    if (c.seed) {
        rc.train.seed = *c.seed;
        rc.synth.seed = *c.seed;
    }
    return rc;
}

std::vector<LabeledSegment> load_samples(const std::string& dir, const SchemaConfig& schema,
                                         const ActivityLabelSet& labels, std::size_t sequence_length,
                                         std::size_t stride, bool quiet) {
    auto loaded = load_dataset_dir(dir, schema, labels);
    if (!quiet) {
        std::cerr << "loaded " << loaded.files << " files, " << loaded.segments.size() << " segments ("
                  << loaded.discarded_runs << " runs discarded, " << loaded.totals.rows_malformed
                  << " malformed rows, " << loaded.totals.values_interpolated << " values interpolated, "
                  << loaded.totals.rows_dropped << " rows dropped)\n";
    }
    auto samples = make_fixed_length_samples(loaded.segments, sequence_length, stride);
    require(!samples.empty(), ErrorKind::Data, "no samples in '" + dir + "'");
    return samples;
}

std::vector<LabeledSegment> select_user(std::vector<LabeledSegment> samples, const std::string& user) {
    if (user.empty()) return samples;
    return loso_split(samples, user).validation;
}

void add_common(CLI::App* sub, Common& c, bool with_config = true) {
    if (with_config) sub->add_option("--config", c.config, "Run configuration JSON (default: built-in synthetic setup)");
    sub->add_option("--seed", c.seed, "Override the configured train and synth seeds (default: config value, 42)");
    sub->add_flag("--quiet", c.quiet, "Suppress progress and summary output");
}

int cmd_gen_synth(const Common& c) {
    const RunConfig rc = resolve_config(c);
    const auto summary = write_synth_dataset(rc.synth, c.out);
    if (!c.quiet) {
        std::cout << "wrote " << summary.files << " files + manifest to " << c.out << ": " << summary.segments
                  << " segments, " << summary.classes << " classes, " << summary.users << " users, seed "
                  << rc.synth.seed << '\n';
    }
    return kOk;
}

struct TrainArgs {
    std::string data;
    std::string held_out_user;
    std::string model;
    std::string history;
    bool untrained = false;
};

int cmd_train(const Common& c, const TrainArgs& a) {
    const RunConfig rc = resolve_config(c);
    const ModelKind kind = a.model.empty() ? rc.model : parse_model_kind(a.model);
    const auto labels = rc.label_set();
    const auto samples = load_samples(a.data, rc.schema, labels, rc.sequence_length, rc.stride, c.quiet);
    const auto split = loso_split(samples, a.held_out_user);
    const Architecture arch = rc.architecture(kind);
    if (!c.quiet) {
        std::cerr << "training " << to_string(kind) << " on " << split.train.size() << " samples, validating on "
                  << split.validation.size() << " (user " << a.held_out_user << "), kernels "
                  << kernels::active().name << '\n';
    }
    TrainHistory history;
    TrainedModel model;
    if (a.untrained) {
        model = untrained_model(split.train, arch, labels.names(), rc.train.seed);
    } else {
        auto result = train(split.train, arch, labels.names(), rc.train, split.validation);
        model = std::move(result.model);
        history = std::move(result.history);
    }
    save_checkpoint(model, c.out);
    const std::string history_path = a.history.empty() ? c.out + ".history.csv" : a.history;
    write_file_atomic(history_path, format_history(history));
    if (!c.quiet) {
        for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
            std::printf("epoch %zu  loss %.6f  val_macro_f1 %.4f\n", e + 1, history.train_loss[e],
                        history.validation_macro_f1[e]);
        }
        std::cout << "checkpoint written to " << c.out << '\n';
    }
    return kOk;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string held_out_user;
    std::string report;
};

int cmd_evaluate(const Common& c, const EvalArgs& a) {
    const RunConfig rc = resolve_config(c);
    const TrainedModel model = load_checkpoint(a.checkpoint);
    const ActivityLabelSet labels(model.class_names);
    auto samples = load_samples(a.data, rc.schema, labels, model.arch.sequence_length(), rc.stride, c.quiet);
    samples = select_user(std::move(samples), a.held_out_user);
    const MetricsReport report = evaluate(model, samples);
    const std::string text = format_report_text(report);
    if (!c.quiet) std::cout << text;
    if (!a.report.empty()) write_file_atomic(a.report, text);
    if (!c.out.empty()) write_file_atomic(c.out, format_report_kv(report));
    return kOk;
}

struct EmbedArgs {
    std::string checkpoint;
    std::string data;
    std::string track;
    std::string grouping;
    std::string held_out_user;
};

int cmd_embed(const Common& c, const EmbedArgs& a) {
    const RunConfig rc = resolve_config(c);
    const TrainedModel model = load_checkpoint(a.checkpoint);
    require(model.arch.kind == ModelKind::Charm, ErrorKind::Checkpoint,
            "embed needs a charm checkpoint (got " + std::string(to_string(model.arch.kind)) + ")");
    const ActivityLabelSet labels(model.class_names);
    auto loaded = load_dataset_dir(a.data, rc.schema, labels);
    auto segments = select_user(std::move(loaded.segments), a.held_out_user);
    std::map<std::string, std::string> grouping;
    if (!a.grouping.empty()) grouping = parse_grouping(read_file(a.grouping));
    const auto windows = extract_label_pure_windows(segments, a.track, model.arch.charm.window, &model.stats,
                                                    grouping, rc.schema.null_label_token);
    const auto analysis = analyse_embeddings(model.arch.charm, model.params, windows);
    export_embedding(analysis.points, c.out);
    if (!c.quiet) {
        std::map<std::string, std::size_t> counts;
        for (const auto& l : windows.labels) ++counts[l];
        std::cout << "embedded " << windows.count() << " label-pure windows from track '" << a.track << "'";
        if (!a.grouping.empty()) std::cout << " (grouped by " << a.grouping << ")";
        std::cout << '\n';
        for (const auto& [label, n] : counts) std::cout << "  " << label << ": " << n << '\n';
        std::printf("explained variance: %.6g %.6g\n", analysis.pca.explained_variance(0),
                    analysis.pca.explained_variance(1));
        std::printf("silhouette: %.6f\n", analysis.silhouette);
    }
    return kOk;
}

struct FeatureArgs {
    std::string data;
};

int cmd_features(const Common& c, const FeatureArgs& a) {
    const RunConfig rc = resolve_config(c);
    const auto labels = rc.label_set();
    const auto samples = load_samples(a.data, rc.schema, labels, rc.sequence_length, rc.stride, c.quiet);
    std::ostringstream out;
    out << "segment,label";
    for (const auto& n : feature_names(samples.front().stream.channel_names())) out << ',' << n;
    out << '\n';
    for (const auto& s : samples) {
        out << s.source << ',' << labels.name(s.high_label);
        for (double v : handcrafted_features(s.stream.samples(), s.stream.channels())) out << ',' << format_double(v);
        out << '\n';
    }
    write_file_atomic(c.out, out.str());
    if (!c.quiet) {
        std::cout << "wrote " << samples.size() << " rows x " << kFeaturesPerChannel * samples.front().stream.channels()
                  << " features to " << c.out << '\n';
    }
    return kOk;
}

int cmd_show_config(const Common& c) {
    std::cout << dump_run_config(resolve_config(c));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CHARM hierarchical activity recognition pipeline"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    Common gen_c, train_c, eval_c, embed_c, feat_c, show_c;
    TrainArgs train_a;
    EvalArgs eval_a;
    EmbedArgs embed_a;
    FeatureArgs feat_a;

    auto* gen = app.add_subcommand("gen-synth", "Write the synthetic compositional dataset");
    add_common(gen, gen_c);
    gen->add_option("--out", gen_c.out, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Train on all users but one (leave-one-subject-out)");
    add_common(tr, train_c);
    tr->add_option("--data", train_a.data, "Data directory")->required();
    tr->add_option("--held-out-user", train_a.held_out_user, "User withheld for validation")->required();
    tr->add_option("--model", train_a.model, "Model kind: charm or mlp (default: config 'model', charm)")
        ->check(CLI::IsMember({"charm", "mlp"}));
    tr->add_option("--out", train_c.out, "Checkpoint path")->required();
    tr->add_option("--history", train_a.history, "Per-epoch history CSV (default: <out>.history.csv)");
    tr->add_flag("--untrained", train_a.untrained, "Write the initialised model without training");

    auto* ev = app.add_subcommand("evaluate", "Precision/recall/F1 report for a checkpoint");
    add_common(ev, eval_c);
    ev->add_option("--checkpoint", eval_a.checkpoint, "Checkpoint path")->required();
    ev->add_option("--data", eval_a.data, "Data directory")->required();
    ev->add_option("--held-out-user", eval_a.held_out_user, "Evaluate only this user's data (default: all)");
    ev->add_option("--out", eval_c.out, "Machine-readable key=value metrics file");
    ev->add_option("--report", eval_a.report, "Text report file");

    auto* em = app.add_subcommand("embed", "PCA of low-level encoder embeddings on label-pure windows");
    add_common(em, embed_c);
    em->add_option("--checkpoint", embed_a.checkpoint, "CHARM checkpoint path")->required();
    em->add_option("--data", embed_a.data, "Data directory")->required();
    em->add_option("--track", embed_a.track, "Low-level label track (e.g. motif, locomotion, manipulation)")
        ->required();
    em->add_option("--grouping", embed_a.grouping, "Text file mapping 'label group' per line");
    em->add_option("--held-out-user", embed_a.held_out_user, "Use only this user's data (default: all)");
    em->add_option("--out", embed_c.out, "Output CSV")->required();

    auto* fe = app.add_subcommand("features", "Export the 5 per-channel hand-crafted features per sample");
    add_common(fe, feat_c);
    fe->add_option("--data", feat_a.data, "Data directory")->required();
    fe->add_option("--out", feat_c.out, "Output CSV")->required();

    auto* show = app.add_subcommand("show-config", "Print the effective configuration as JSON");
    add_common(show, show_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*gen) return cmd_gen_synth(gen_c);
        if (*tr) return cmd_train(train_c, train_a);
        if (*ev) return cmd_evaluate(eval_c, eval_a);
        if (*em) return cmd_embed(embed_c, embed_a);
        if (*fe) return cmd_features(feat_c, feat_a);
        if (*show) return cmd_show_config(show_c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}
