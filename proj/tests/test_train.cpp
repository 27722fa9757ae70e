#include "support.hpp"

#include "lulc/pipeline.hpp"
#include "lulc/synth.hpp"
#include "lulc/train.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace lulc;
using lulc::test::TempDir;

namespace {

PatchSet fixture_patches(int classes, double separation, std::uint64_t seed, int region = 30, int channels = 4) {
    SynthSpec spec;
    spec.classes = classes;
    spec.channels = channels;
    spec.separation = separation;
    spec.region_width = region;
    spec.region_height = region;
    spec.seed = seed;
    const auto fx = synthesize(spec);
    PatchOptions options;
    options.seed = seed;
    return make_patchset(fx.stack, fx.labels, fx.catalog, options);
}

Architecture arch_for(const PatchSet& set, Variant variant = Variant::classifier) {
    Architecture arch;
    arch.channels = static_cast<int>(set.channel_count());
    arch.classes = static_cast<int>(set.catalog.size());
    arch.variant = variant;
    return arch;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("defaults follow the published protocol") {
    const TrainConfig c;
    CHECK(c.learning_rate == 1e-4);
    CHECK(c.epochs == 150);
    CHECK(c.batch_size == 32);
    CHECK(c.optimizer == OptimizerKind::adam);
    CHECK(c.beta1 == 0.9);
    CHECK(c.beta2 == 0.999);
    CHECK(c.epsilon == 1e-7);
    CHECK(c.bn_momentum == 0.99);
    const SplitRatios r;
    CHECK(r.train == 0.70);
    CHECK(r.val == 0.15);
    CHECK(r.test == 0.15);
}

TEST_CASE("two separable classes are learned within 30 epochs") {
    const auto set = fixture_patches(2, 10.0, 1);
    TrainConfig config;
    config.epochs = 30;
    config.seed = 1;
    const auto result = train(init_model(arch_for(set), 1), set, config);
    CHECK(result.history.size() == 30);
    double best = 0.0;
    for (const auto& e : result.history) best = std::max(best, e.val_acc);
    CHECK(best >= 0.99);
    CHECK(evaluate(result.model, set.select(Split::val)).accuracy >= 0.99);
}

TEST_CASE("training is bit-deterministic under a seed") {
    const auto set = fixture_patches(3, 6.0, 2);
    TrainConfig config;
    config.epochs = 3;
    config.seed = 5;
    config.augment = true;
    const auto a = train(init_model(arch_for(set), 5), set, config);
    const auto b = train(init_model(arch_for(set), 5), set, config);
    CHECK(identical(a.model, b.model));
    config.seed = 6;
    const auto c = train(init_model(arch_for(set), 5), set, config);
    CHECK_FALSE(identical(a.model, c.model));
}

TEST_CASE("a zero learning rate only moves batch-norm running statistics") {
    const auto set = fixture_patches(2, 4.0, 3);
    TrainConfig config;
    config.epochs = 2;
    config.learning_rate = 0.0;
    const auto start = init_model(arch_for(set), 3);
    const auto result = train(start, set, config);
    CHECK(result.model.params == start.params);
    CHECK(result.model.running_mean != start.running_mean);
    CHECK(result.model.running_var != start.running_var);
}

TEST_CASE("the embedding variant trains with the scaled cosine softmax") {
    const auto set = fixture_patches(3, 10.0, 4);
    TrainConfig config;
    config.epochs = 15;
    config.learning_rate = 1e-3;
    const auto result = train(init_model(arch_for(set, Variant::embedding), 4), set, config);
    CHECK(evaluate(result.model, set.select(Split::test)).accuracy >= 0.95);
}

TEST_CASE("training contract violations") {
    auto set = fixture_patches(2, 4.0, 5);
    TrainConfig config;
    config.epochs = 1;
    auto arch = arch_for(set);
    arch.channels = 3;
    CHECK_ERROR_KIND(train(init_model(arch, 1), set, config), compatibility);

    auto no_val = set;
    for (auto& p : no_val.patches) {
        if (p.split == Split::val) p.split = Split::train;
    }
    CHECK_ERROR_KIND(train(init_model(arch_for(set), 1), no_val, config), data);

    config.batch_size = 1;
    CHECK_ERROR_KIND(train(init_model(arch_for(set), 1), set, config), config);
    config.batch_size = 32;
    config.epochs = 0;
    CHECK_ERROR_KIND(train(init_model(arch_for(set), 1), set, config), config);
}

TEST_CASE("SGD with a tiny step still improves a frozen fit") {
    const auto set = fixture_patches(2, 8.0, 6);
    TrainConfig config;
    config.epochs = 5;
    config.optimizer = OptimizerKind::sgd;
    config.learning_rate = 0.05;
    const auto result = train(init_model(arch_for(set), 6), set, config);
    CHECK(result.history.back().train_loss < result.history.front().train_loss);
}

TEST_CASE("history CSV columns") {
    TempDir dir;
    std::vector<EpochStats> h{{1, 0.5, 0.75, 0.25, 1.0}};
    write_history_csv(h, dir / "h.csv");
    CHECK(lulc::test::slurp(dir / "h.csv") == "epoch,train_loss,train_acc,val_loss,val_acc\n1,0.5,0.75,0.25,1\n");
}

}

TEST_SUITE("checkpoint") {

TEST_CASE("round trip reproduces parameters and forward outputs") {
    TempDir dir;
    for (auto variant : {Variant::classifier, Variant::embedding}) {
        Architecture arch;
        arch.variant = variant;
        auto model = init_model(arch, 8);
        Rng rng(8);
        for (auto& v : model.running_mean) v = static_cast<float>(rng.normal());
        for (auto& v : model.running_var) v = static_cast<float>(rng.uniform(0.5, 2.0));
        model.input_norm = {std::vector<double>(13, 0.5), std::vector<double>(13, 2.0)};
        model.catalog = ClassCatalog::baseline();
        const auto path = dir / (to_string(variant) + ".json");
        save_model(model, path);
        const auto back = load_model(path);
        CHECK(identical(back, model));
        std::vector<float> x(5 * arch.input_size());
        for (auto& v : x) v = static_cast<float>(rng.normal());
        const auto a = forward(model, std::span<const float>(x), 5, Mode::eval);
        const auto b = forward(back, std::span<const float>(x), 5, Mode::eval);
        CHECK(a.output == b.output);
    }
}

TEST_CASE("property: random checkpoints round-trip bit-exactly") {
    TempDir dir;
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        Architecture arch;
        arch.channels = 1 + static_cast<int>(rng.below(13));
        arch.classes = 2 + static_cast<int>(rng.below(16));
        arch.variant = trial % 2 ? Variant::embedding : Variant::classifier;
        auto model = init_model(arch, rng.next());
        for (auto& t : model.params)
            for (auto& v : t) v = static_cast<float>(rng.normal(0, 10));
        for (auto& v : model.running_var) v = static_cast<float>(rng.uniform(0.01, 5));
        model.input_norm = {std::vector<double>(arch.channels, rng.normal()), std::vector<double>(arch.channels, 1.5)};
        model.catalog = ClassCatalog::numbered(arch.classes);
        save_model(model, dir / "m.json");
        CHECK(identical(load_model(dir / "m.json"), model));
    }
}

TEST_CASE("checkpoint errors") {
    TempDir dir;
    Architecture arch;
    auto model = init_model(arch, 2);
    model.input_norm = {std::vector<double>(13, 0.0), std::vector<double>(13, 1.0)};
    model.catalog = ClassCatalog::baseline();
    save_model(model, dir / "m.json");
    CHECK_ERROR_KIND(load_model(dir / "m.json", Variant::embedding), compatibility);
    CHECK(identical(load_model(dir / "m.json", Variant::classifier), model));

    const auto raw = data_path_for(dir / "m.json");
    const auto bytes = lulc::test::slurp(raw);
    lulc::test::spit(raw, bytes.substr(0, bytes.size() - 8));
    CHECK_ERROR_KIND(load_model(dir / "m.json"), format);
    lulc::test::spit(raw, bytes);

    auto header = nlohmann::json::parse(lulc::test::slurp(dir / "m.json"));
    header["descriptor"]["classes"] = 16;
    lulc::test::spit(dir / "m.json", header.dump());
    CHECK_ERROR_KIND(load_model(dir / "m.json"), format);
    CHECK_ERROR_KIND(load_model(dir / "none.json"), io);
}

}
