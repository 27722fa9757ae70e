// Batch driver for the land-cover pipeline: synth, stack, patches, train,
// eval, embed, tsne, groups, predict. Exit codes: 0 success, 2 bad input
// (missing or malformed files, bad flags), 3 contract violation.

#include "lulc/embedding.hpp"
#include "lulc/error.hpp"
#include "lulc/pipeline.hpp"
#include "lulc/render.hpp"
#include "lulc/synth.hpp"
#include "lulc/tsne.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace lulc;
namespace fs = std::filesystem;

constexpr int kExitInput = 2;
constexpr int kExitContract = 3;

Band read_band(const fs::path& path) {
    const auto stack = read_stack(path);
    if (stack.channel_count() != 1) fail(ErrorKind::format, path.string() + ": expected a single-band file");
    return stack.band(0);
}

fs::path catalog_sibling(fs::path latents) { return latents.replace_extension(".catalog.json"); }

std::pair<int, int> parse_pair(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) fail(ErrorKind::config, "confusable pair must look like a:b, got " + text);
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

void say(const std::string& line) { std::cout << line << '\n'; }

struct Options {
    std::uint64_t seed = 0;

    struct {
        SynthSpec spec;
        std::vector<std::string> pairs;
        std::string stack, labels, catalog;
    } synth;

    struct {
        std::string blue, green, red, nir, swir1, swir2, dem, out;
        double cell_size = 30.0;
        bool ndwi_flip = false;
    } stack;

    struct {
        std::string stack, labels, catalog, out;
        bool no_balance = false;
        double train = 0.70, val = 0.15, test = 0.15;
    } patches;

    struct {
        std::string patches, out, variant = "classifier", optimizer = "adam", grouping, fine_grain, history;
        TrainConfig config;
    } train;

    struct {
        std::string model, patches, split = "test", out_dir = ".", prefix, grouping, fine_grain;
    } eval;

    struct {
        std::string model, patches, split = "test", out;
    } embed;

    struct {
        std::string latents, catalog, out, svg, kl;
        TsneConfig config;
    } tsne;

    struct {
        std::string latents, catalog, out, pairs;
        double threshold = 0.5;
    } suggest;

    struct {
        std::string mapping, patches, confusion, catalog, out;
    } apply;

    struct {
        std::string model, stack, out, ppm;
    } predict;
};

std::optional<GroupMapping> optional_mapping(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return read_mapping(path);
}

std::optional<std::string> optional_text(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return text;
}

void run_synth(Options& o) {
    auto& s = o.synth;
    s.spec.seed = o.seed;
    for (const auto& p : s.pairs) s.spec.confusable.push_back(parse_pair(p));
    const auto fixture = synthesize(s.spec);
    write_stack(fixture.stack, s.stack);
    write_labels(fixture.labels, s.labels);
    write_catalog(fixture.catalog, s.catalog);
    say("synth: " + std::to_string(fixture.stack.width) + "x" + std::to_string(fixture.stack.height) +
        " classes=" + std::to_string(s.spec.classes) + " channels=" + std::to_string(s.spec.channels) +
        " confusable=" + std::to_string(s.spec.confusable.size()) + " seed=" + std::to_string(o.seed));
}

void run_stack(Options& o) {
    auto& s = o.stack;
    SceneBands bands{read_band(s.blue), read_band(s.green), read_band(s.red), read_band(s.nir),
                     read_band(s.swir1), read_band(s.swir2), read_band(s.dem)};
    const auto stack = build_stack(bands, s.ndwi_flip, s.cell_size);
    write_stack(stack, s.out);
    say("stack: " + std::to_string(stack.width) + "x" + std::to_string(stack.height) +
        " channels=" + std::to_string(stack.channel_count()) + (s.ndwi_flip ? " ndwi=flipped" : " ndwi=nir-swir"));
}

void run_patches(Options& o) {
    auto& p = o.patches;
    const auto stack = read_stack(p.stack);
    const auto labels = read_labels(p.labels);
    const auto catalog = p.catalog.empty() ? ClassCatalog::baseline() : read_catalog(p.catalog);
    PatchOptions options;
    options.balance = !p.no_balance;
    options.ratios = {p.train, p.val, p.test};
    options.seed = o.seed;
    const auto set = make_patchset(stack, labels, catalog, options);
    write_patchset(set, p.out);
    say("patches: total=" + std::to_string(set.size()) + " train=" + std::to_string(set.count(Split::train)) +
        " val=" + std::to_string(set.count(Split::val)) + " test=" + std::to_string(set.count(Split::test)) +
        " classes=" + std::to_string(set.catalog.size()));
}

void run_train(Options& o) {
    auto& t = o.train;
    t.config.seed = o.seed;
    t.config.optimizer = optimizer_from_string(t.optimizer);
    const auto view = training_view(read_patchset(t.patches), optional_mapping(t.grouping), optional_text(t.fine_grain));

    Architecture arch;
    arch.channels = static_cast<int>(view.channel_count());
    arch.classes = static_cast<int>(view.catalog.size());
    arch.variant = variant_from_string(t.variant);
    auto result = train(init_model(arch, o.seed), view, t.config);
    save_model(result.model, t.out);
    if (!t.history.empty()) write_history_csv(result.history, t.history);

    const auto test = evaluate(result.model, view.select(Split::test));
    const auto& best = result.history.at(result.best_epoch - 1);
    say("train: variant=" + t.variant + " classes=" + std::to_string(arch.classes) +
        " params=" + std::to_string(arch.trainable_count()) + " epochs=" + std::to_string(t.config.epochs) +
        " best_epoch=" + std::to_string(result.best_epoch) + " val_acc=" + fixed(best.val_acc) +
        " test_loss=" + fixed(test.loss) + " test_acc=" + fixed(test.accuracy));
}

void run_eval(Options& o) {
    auto& e = o.eval;
    const auto model = load_model(e.model);
    const auto view = training_view(read_patchset(e.patches), optional_mapping(e.grouping), optional_text(e.fine_grain));
    const auto result = evaluate_split(model, view, split_from_string(e.split));
    write_evaluation(result, e.out_dir, e.prefix);
    say("eval: split=" + e.split + " n=" + std::to_string(result.confusion.total()) + " loss=" +
        fixed(result.eval.loss) + " accuracy=" + fixed(result.report.accuracy) + " macro_f1=" +
        fixed(result.report.macro_f1));
}

void run_embed(Options& o) {
    auto& e = o.embed;
    const auto model = load_model(e.model, Variant::embedding);
    const auto set = read_patchset(e.patches);
    const auto latents = extract_latents(model, set, split_from_string(e.split));
    write_latents_csv(latents, e.out);
    write_catalog(latents.catalog, catalog_sibling(e.out));
    say("embed: split=" + e.split + " n=" + std::to_string(latents.size()) + " dim=" + std::to_string(latents.dim));
}

void run_tsne(Options& o) {
    auto& t = o.tsne;
    t.config.seed = o.seed;
    const auto catalog = read_catalog(t.catalog.empty() ? catalog_sibling(t.latents) : fs::path(t.catalog));
    const auto latents = read_latents_csv(t.latents, catalog);
    const std::vector<double> x(latents.vectors.begin(), latents.vectors.end());
    const auto result = tsne(x, latents.size(), latents.dim, t.config);
    write_tsne_csv(result.y, latents.labels, t.out);
    if (!t.svg.empty()) write_tsne_svg(result.y, latents.labels, catalog, t.svg);
    if (!t.kl.empty()) write_kl_csv(result.kl_history, t.kl);
    std::vector<int> labels = latents.labels;
    const double sil = silhouette_score(result.y, latents.size(), 2, labels);
    say("tsne: n=" + std::to_string(latents.size()) + " perplexity=" + fixed(t.config.perplexity, 1) +
        " iterations=" + std::to_string(t.config.iterations) + " kl=" + fixed(result.kl_history.back()) +
        " silhouette=" + fixed(sil));
}

void run_suggest(Options& o) {
    auto& s = o.suggest;
    const auto catalog = read_catalog(s.catalog.empty() ? catalog_sibling(s.latents) : fs::path(s.catalog));
    const auto latents = read_latents_csv(s.latents, catalog);
    const auto suggestion = suggest_groups(latents, s.threshold);
    write_mapping(suggestion.mapping, s.out);
    if (!s.pairs.empty()) write_pairs_csv(suggestion, catalog, s.pairs);
    std::string groups;
    for (const auto& g : suggestion.mapping.groups) {
        groups += " " + g.id + "={";
        for (std::size_t i = 0; i < g.members.size(); ++i) groups += (i ? "," : "") + std::to_string(g.members[i]);
        groups += "}";
    }
    say("groups suggest: threshold=" + fixed(s.threshold) + " groups=" + std::to_string(suggestion.mapping.groups.size()) +
        groups);
}

void run_apply(Options& o) {
    auto& a = o.apply;
    const auto mapping = read_mapping(a.mapping);
    if (!a.patches.empty() == !a.confusion.empty()) {
        fail(ErrorKind::config, "groups apply takes exactly one of --patches or --confusion");
    }
    if (!a.patches.empty()) {
        const auto set = apply_grouping(read_patchset(a.patches), mapping);
        write_patchset(set, a.out);
        say("groups apply: patches=" + std::to_string(set.size()) + " classes=" + std::to_string(set.catalog.size()));
        return;
    }
    const auto catalog = a.catalog.empty() ? ClassCatalog::baseline() : read_catalog(a.catalog);
    const auto cm = read_confusion_csv(a.confusion, catalog);
    const auto merged = apply_grouping(cm, mapping);
    write_confusion_csv(merged, a.out);
    say("groups apply: classes=" + std::to_string(merged.classes()) + " total=" + std::to_string(merged.total()) +
        " accuracy_before=" + fixed(overall_accuracy(cm)) + " accuracy_after=" + fixed(overall_accuracy(merged)));
}

void run_predict(Options& o) {
    auto& p = o.predict;
    const auto model = load_model(p.model);
    const auto stack = read_stack(p.stack);
    const auto map = predict_map(model, stack);
    write_labels(map.ids, p.out);
    if (!p.ppm.empty()) write_ppm(map.indices, p.ppm);
    std::size_t predicted = 0;
    for (auto v : map.ids.labels) predicted += v != kNodataLabel;
    say("predict: " + std::to_string(stack.width) + "x" + std::to_string(stack.height) +
        " predicted=" + std::to_string(predicted) + " sentinel=" + std::to_string(map.ids.labels.size() - predicted));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Land-use/land-cover patch classification pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI/TOML file with option values");
    Options o;
    app.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic stack, label raster and catalog");
    synth->add_option("--classes", o.synth.spec.classes)->capture_default_str();
    synth->add_option("--channels", o.synth.spec.channels)->capture_default_str();
    synth->add_option("--region-width", o.synth.spec.region_width)->capture_default_str();
    synth->add_option("--region-height", o.synth.spec.region_height)->capture_default_str();
    synth->add_option("--columns", o.synth.spec.region_columns, "Regions per row (0: square-ish)")->capture_default_str();
    synth->add_option("--separation", o.synth.spec.separation, "Distance between class means in noise sd")->capture_default_str();
    synth->add_option("--noise-sd", o.synth.spec.noise_sd)->capture_default_str();
    synth->add_option("--confusable", o.synth.pairs, "Confusable class index pair a:b (repeatable)");
    synth->add_option("--confusable-offset", o.synth.spec.confusable_offset)->capture_default_str();
    synth->add_option("--out-stack", o.synth.stack)->required();
    synth->add_option("--out-labels", o.synth.labels)->required();
    synth->add_option("--out-catalog", o.synth.catalog)->required();

    auto* stack = app.add_subcommand("stack", "Build the 13-channel stack from six bands and a DEM");
    for (auto [flag, target] : {std::pair{"--blue", &o.stack.blue}, {"--green", &o.stack.green}, {"--red", &o.stack.red},
                                {"--nir", &o.stack.nir}, {"--swir1", &o.stack.swir1}, {"--swir2", &o.stack.swir2},
                                {"--dem", &o.stack.dem}, {"--out", &o.stack.out}}) {
        stack->add_option(flag, *target)->required();
    }
    stack->add_option("--cell-size", o.stack.cell_size, "DEM cell size in meters")->capture_default_str();
    stack->add_flag("--ndwi-flip", o.stack.ndwi_flip, "Use (SWIR - NIR) / (SWIR + NIR)");

    auto* patches = app.add_subcommand("patches", "Extract, balance and split homogeneous 3x3 patches");
    patches->add_option("--stack", o.patches.stack)->required();
    patches->add_option("--labels", o.patches.labels)->required();
    patches->add_option("--catalog", o.patches.catalog, "Class catalog (default: 17-class baseline)");
    patches->add_option("--out", o.patches.out)->required();
    patches->add_flag("--no-balance", o.patches.no_balance);
    patches->add_option("--train-ratio", o.patches.train)->capture_default_str();
    patches->add_option("--val-ratio", o.patches.val)->capture_default_str();
    patches->add_option("--test-ratio", o.patches.test)->capture_default_str();

    auto* train = app.add_subcommand("train", "Train the classifier or embedding network");
    train->add_option("--patches", o.train.patches)->required();
    train->add_option("--out", o.train.out, "Checkpoint path")->required();
    train->add_option("--variant", o.train.variant)->check(CLI::IsMember({"classifier", "embedding"}))->capture_default_str();
    train->add_option("--lr", o.train.config.learning_rate)->capture_default_str();
    train->add_option("--epochs", o.train.config.epochs)->capture_default_str();
    train->add_option("--batch", o.train.config.batch_size)->capture_default_str();
    train->add_flag("--augment", o.train.config.augment, "Random dihedral transform per patch per epoch");
    train->add_option("--optimizer", o.train.optimizer)->check(CLI::IsMember({"adam", "sgd"}))->capture_default_str();
    train->add_option("--grouping", o.train.grouping, "Group mapping for coarse-grain training");
    train->add_option("--fine-grain", o.train.fine_grain, "Group id for binary training (needs --grouping)");
    train->add_option("--history", o.train.history, "Per-epoch CSV");

    auto* eval = app.add_subcommand("eval", "Confusion matrix and classification report on a split");
    eval->add_option("--model", o.eval.model)->required();
    eval->add_option("--patches", o.eval.patches)->required();
    eval->add_option("--split", o.eval.split)->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();
    eval->add_option("--out-dir", o.eval.out_dir)->capture_default_str();
    eval->add_option("--prefix", o.eval.prefix, "File name prefix for the CSVs");
    eval->add_option("--grouping", o.eval.grouping);
    eval->add_option("--fine-grain", o.eval.fine_grain);

    auto* embed = app.add_subcommand("embed", "Latent vectors from the embedding network");
    embed->add_option("--model", o.embed.model)->required();
    embed->add_option("--patches", o.embed.patches)->required();
    embed->add_option("--split", o.embed.split)->check(CLI::IsMember({"train", "val", "test"}))->capture_default_str();
    embed->add_option("--out", o.embed.out)->required();

    auto* tsne_cmd = app.add_subcommand("tsne", "Exact t-SNE of latent vectors");
    tsne_cmd->add_option("--latents", o.tsne.latents)->required();
    tsne_cmd->add_option("--catalog", o.tsne.catalog, "Default: the catalog written next to the latents");
    tsne_cmd->add_option("--out", o.tsne.out)->required();
    tsne_cmd->add_option("--svg", o.tsne.svg);
    tsne_cmd->add_option("--kl", o.tsne.kl, "Per-iteration KL CSV");
    tsne_cmd->add_option("--perplexity", o.tsne.config.perplexity)->capture_default_str();
    tsne_cmd->add_option("--iterations", o.tsne.config.iterations)->capture_default_str();
    tsne_cmd->add_option("--learning-rate", o.tsne.config.learning_rate)->capture_default_str();
    tsne_cmd->add_option("--exaggeration", o.tsne.config.exaggeration)->capture_default_str();
    tsne_cmd->add_option("--exaggeration-iterations", o.tsne.config.exaggeration_iterations)->capture_default_str();

    auto* groups = app.add_subcommand("groups", "Suggest or apply class groups");
    groups->require_subcommand(1);
    auto* suggest = groups->add_subcommand("suggest", "Rank class pairs by centroid cosine distance");
    suggest->add_option("--latents", o.suggest.latents)->required();
    suggest->add_option("--catalog", o.suggest.catalog);
    suggest->add_option("--threshold", o.suggest.threshold)->capture_default_str();
    suggest->add_option("--out", o.suggest.out, "Mapping JSON")->required();
    suggest->add_option("--pairs", o.suggest.pairs, "Ranked pair CSV");
    auto* apply = groups->add_subcommand("apply", "Relabel a patch set or merge a confusion matrix");
    apply->add_option("--mapping", o.apply.mapping)->required();
    apply->add_option("--patches", o.apply.patches);
    apply->add_option("--confusion", o.apply.confusion);
    apply->add_option("--catalog", o.apply.catalog, "Catalog of the confusion CSV (default: baseline)");
    apply->add_option("--out", o.apply.out)->required();

    auto* predict = app.add_subcommand("predict", "Dense class map with a sliding 3x3 window");
    predict->add_option("--model", o.predict.model)->required();
    predict->add_option("--stack", o.predict.stack)->required();
    predict->add_option("--out", o.predict.out, "Class id raster")->required();
    predict->add_option("--ppm", o.predict.ppm, "Rendered map");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (synth->parsed()) run_synth(o);
        else if (stack->parsed()) run_stack(o);
        else if (patches->parsed()) run_patches(o);
        else if (train->parsed()) run_train(o);
        else if (eval->parsed()) run_eval(o);
        else if (embed->parsed()) run_embed(o);
        else if (tsne_cmd->parsed()) run_tsne(o);
        else if (suggest->parsed()) run_suggest(o);
        else if (apply->parsed()) run_apply(o);
        else if (predict->parsed()) run_predict(o);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return e.kind() == ErrorKind::io || e.kind() == ErrorKind::format ? kExitInput : kExitContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitContract;
    }
    return 0;
}
