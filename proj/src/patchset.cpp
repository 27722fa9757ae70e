#include "lulc/patchset.hpp"

#include "detail/binary_io.hpp"
#include "detail/json_io.hpp"
#include "lulc/error.hpp"
#include "lulc/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

namespace lulc {

const char* to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& text) {
    if (text == "train") return Split::train;
    if (text == "val") return Split::val;
    if (text == "test") return Split::test;
    fail(ErrorKind::config, "unknown split '" + text + "' (expected train, val or test)");
}

bool Patch::operator==(const Patch& other) const {
    return label_index == other.label_index && source_x == other.source_x && source_y == other.source_y &&
           split == other.split && values.size() == other.values.size() &&
           (values.empty() || std::memcmp(values.data(), other.values.data(), values.size() * sizeof(float)) == 0);
}

std::size_t PatchSet::count(Split s) const {
    return static_cast<std::size_t>(std::count_if(patches.begin(), patches.end(), [&](const Patch& p) { return p.split == s; }));
}

std::vector<std::size_t> PatchSet::class_counts() const {
    std::vector<std::size_t> counts(catalog.size(), 0);
    for (const auto& p : patches) ++counts.at(p.label_index);
    return counts;
}

std::vector<std::size_t> PatchSet::class_counts(Split s) const {
    std::vector<std::size_t> counts(catalog.size(), 0);
    for (const auto& p : patches) {
        if (p.split == s) ++counts.at(p.label_index);
    }
    return counts;
}

std::vector<const Patch*> PatchSet::select(Split s) const {
    std::vector<const Patch*> out;
    for (const auto& p : patches) {
        if (p.split == s) out.push_back(&p);
    }
    return out;
}

std::vector<Patch> extract_homogeneous(const RasterStack& stack, const LabelRaster& labels,
                                       const ClassCatalog& catalog) {
    if (stack.width != labels.width || stack.height != labels.height) {
        fail(ErrorKind::shape, "stack is " + std::to_string(stack.width) + "x" + std::to_string(stack.height) +
                                   " but labels are " + std::to_string(labels.width) + "x" +
                                   std::to_string(labels.height));
    }
    const auto channels = static_cast<int>(stack.channel_count());
    std::vector<Patch> patches;
    for (int wy = 0; wy + kPatchSize <= stack.height; wy += kPatchSize) {
        for (int wx = 0; wx + kPatchSize <= stack.width; wx += kPatchSize) {
            const auto id = labels.at(wx, wy);
            if (id == kNodataLabel) continue;
            const auto index = catalog.index_of(id);
            if (!index) continue;
            bool keep = true;
            for (int y = 0; y < kPatchSize && keep; ++y) {
                for (int x = 0; x < kPatchSize && keep; ++x) keep = labels.at(wx + x, wy + y) == id;
            }
            if (!keep) continue;
            Patch patch;
            patch.values.resize(static_cast<std::size_t>(kPatchPixels) * channels);
            for (int y = 0; y < kPatchSize && keep; ++y) {
                for (int x = 0; x < kPatchSize && keep; ++x) {
                    for (int c = 0; c < channels; ++c) {
                        const float v = stack.at(c, wx + x, wy + y);
                        if (stack.is_nodata(v)) {
                            keep = false;
                            break;
                        }
                        patch.values[(static_cast<std::size_t>(y) * kPatchSize + x) * channels + c] = v;
                    }
                }
            }
            if (!keep) continue;
            patch.label_index = static_cast<std::uint16_t>(*index);
            patch.source_x = wx;
            patch.source_y = wy;
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<Patch>& patches, std::size_t classes) {
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const auto label = patches[i].label_index;
        if (label >= classes) fail(ErrorKind::label, "patch label index " + std::to_string(label) + " outside catalog");
        by_class[label].push_back(i);
    }
    return by_class;
}

}  // namespace

std::vector<Patch> balance(const std::vector<Patch>& patches, const ClassCatalog& catalog, std::uint64_t seed) {
    auto by_class = indices_by_class(patches, catalog.size());
    std::size_t target = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < by_class.size(); ++k) {
        if (by_class[k].empty()) {
            fail(ErrorKind::coverage, "class " + catalog[k].code + " (" + catalog[k].name + ") has no patches");
        }
        target = std::min(target, by_class[k].size());
    }
    Rng rng(seed);
    std::vector<std::uint8_t> keep(patches.size(), 0);
    for (auto& members : by_class) {
        // Partial Fisher-Yates: the first `target` slots are a uniform sample.
        for (std::size_t i = 0; i < target; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
            std::swap(members[i], members[j]);
            keep[members[i]] = 1;
        }
    }
    std::vector<Patch> out;
    out.reserve(target * by_class.size());
    for (std::size_t i = 0; i < patches.size(); ++i) {
        if (keep[i]) out.push_back(patches[i]);
    }
    return out;
}

std::array<std::size_t, 3> split_counts(std::size_t n, SplitRatios ratios) {
    const double r[3] = {ratios.train, ratios.val, ratios.test};
    std::array<std::size_t, 3> counts{};
    double frac[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = static_cast<double>(n) * r[i];
        const double whole = std::floor(exact + 1e-9);
        counts[i] = static_cast<std::size_t>(whole);
        frac[i] = exact - whole;
        assigned += counts[i];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i) {
            if (frac[i] > frac[best]) best = i;
        }
        ++counts[best];
        frac[best] = -1.0;
        ++assigned;
    }
    return counts;
}

PatchSet split(std::vector<Patch> patches, const ClassCatalog& catalog, std::vector<ChannelDesc> channels,
               std::uint64_t seed, SplitRatios ratios) {
    for (double r : {ratios.train, ratios.val, ratios.test}) {
        if (!(r >= 0.0)) fail(ErrorKind::config, "split ratios must be nonnegative");
    }
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        fail(ErrorKind::config, "split ratios must sum to 1");
    }
    auto by_class = indices_by_class(patches, catalog.size());
    Rng rng(seed);
    for (auto& members : by_class) {
        rng.shuffle(std::span(members));
        const auto counts = split_counts(members.size(), ratios);
        for (std::size_t i = 0; i < members.size(); ++i) {
            auto& p = patches[members[i]];
            p.split = i < counts[0] ? Split::train : (i < counts[0] + counts[1] ? Split::val : Split::test);
        }
    }
    PatchSet set;
    set.channels = std::move(channels);
    set.catalog = catalog;
    set.patches = std::move(patches);
    set.seed = seed;
    return set;
}

namespace {

// Source cell (sx, sy) read into output cell (x, y).
void transform_source(int transform_id, int x, int y, int& sx, int& sy) {
    constexpr int m = kPatchSize - 1;
    switch (transform_id) {
        case 0: sx = x; sy = y; break;
        case 1: sx = y; sy = m - x; break;
        case 2: sx = m - x; sy = m - y; break;
        case 3: sx = m - y; sy = x; break;
        case 4: sx = m - x; sy = y; break;
        case 5: sx = x; sy = m - y; break;
        case 6: sx = y; sy = x; break;
        case 7: sx = m - y; sy = m - x; break;
        default: fail(ErrorKind::config, "augmentation transform id must be in 0..7, got " + std::to_string(transform_id));
    }
}

}  // namespace

void augment_values(std::span<const float> in, std::span<float> out, int channels, int transform_id) {
    if (in.size() != static_cast<std::size_t>(kPatchPixels) * channels || out.size() != in.size()) {
        fail(ErrorKind::shape, "augment: buffer size does not match a 3x3 patch");
    }
    for (int y = 0; y < kPatchSize; ++y) {
        for (int x = 0; x < kPatchSize; ++x) {
            int sx, sy;
            transform_source(transform_id, x, y, sx, sy);
            const auto dst = (static_cast<std::size_t>(y) * kPatchSize + x) * channels;
            const auto src = (static_cast<std::size_t>(sy) * kPatchSize + sx) * channels;
            std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(src), channels, out.begin() + static_cast<std::ptrdiff_t>(dst));
        }
    }
}

Patch augment(const Patch& patch, int transform_id) {
    Patch out = patch;
    augment_values(patch.values, out.values, patch.channels(), transform_id);
    return out;
}

// --- files -------------------------------------------------------------------

void write_patchset(const PatchSet& set, const std::filesystem::path& path) {
    const std::size_t channels = set.channel_count();
    const std::size_t per_patch = kPatchPixels * channels;
    std::vector<float> values;
    std::vector<std::uint16_t> labels;
    std::vector<std::uint8_t> tags;
    std::vector<int> sources;
    values.reserve(set.size() * per_patch);
    for (const auto& p : set.patches) {
        if (p.values.size() != per_patch) fail(ErrorKind::shape, "patch value count does not match channel count");
        if (p.label_index >= set.catalog.size()) fail(ErrorKind::label, "patch label outside catalog");
        values.insert(values.end(), p.values.begin(), p.values.end());
        labels.push_back(p.label_index);
        tags.push_back(static_cast<std::uint8_t>(p.split));
        sources.push_back(p.source_x);
        sources.push_back(p.source_y);
    }
    std::vector<std::uint8_t> bytes;
    detail::append_le<float>(bytes, values);
    detail::append_le<std::uint16_t>(bytes, labels);
    detail::append_le<std::uint8_t>(bytes, tags);
    detail::write_bytes(data_path_for(path), bytes);

    detail::json doc = {{"format", "lulc-patchset"},
                        {"count", set.size()},
                        {"patch_size", kPatchSize},
                        {"channels", channels},
                        {"channel_descs", detail::channels_to_json(set.channels)},
                        {"layout", "HWC"},
                        {"catalog", detail::catalog_to_json(set.catalog)},
                        {"seed", set.seed},
                        {"split_tags", {{"train", 0}, {"val", 1}, {"test", 2}}},
                        {"source_xy", sources}};
    detail::write_json(doc, path);
}

PatchSet read_patchset(const std::filesystem::path& path) {
    const auto doc = detail::read_json(path);
    const std::string what = path.string();
    const auto count = detail::field<std::size_t>(doc, "count", what);
    if (detail::field<int>(doc, "patch_size", what) != kPatchSize) fail(ErrorKind::format, what + ": patch_size must be 3");
    const auto channels = detail::field<std::size_t>(doc, "channels", what);
    PatchSet set;
    set.channels = detail::channels_from_json(doc.contains("channel_descs") ? doc.at("channel_descs") : detail::json::array(), what);
    if (set.channels.size() != channels) fail(ErrorKind::format, what + ": channel_descs does not match channels");
    set.catalog = detail::catalog_from_json(doc.contains("catalog") ? doc.at("catalog") : detail::json(), what);
    set.seed = detail::field<std::uint64_t>(doc, "seed", what);
    auto sources = doc.contains("source_xy") ? detail::field<std::vector<int>>(doc, "source_xy", what) : std::vector<int>();
    if (!sources.empty() && sources.size() != 2 * count) fail(ErrorKind::format, what + ": source_xy size mismatch");

    const auto bytes = detail::read_bytes(data_path_for(path));
    detail::ByteReader reader(bytes, data_path_for(path).string());
    const std::size_t per_patch = kPatchPixels * channels;
    const auto values = reader.take<float>(count * per_patch);
    const auto labels = reader.take<std::uint16_t>(count);
    const auto tags = reader.take<std::uint8_t>(count);
    reader.expect_end();

    set.patches.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto& p = set.patches[i];
        p.values.assign(values.begin() + static_cast<std::ptrdiff_t>(i * per_patch),
                        values.begin() + static_cast<std::ptrdiff_t>((i + 1) * per_patch));
        if (labels[i] >= set.catalog.size()) fail(ErrorKind::format, what + ": label index outside catalog");
        p.label_index = labels[i];
        if (tags[i] > 2) fail(ErrorKind::format, what + ": invalid split tag " + std::to_string(tags[i]));
        p.split = static_cast<Split>(tags[i]);
        if (!sources.empty()) {
            p.source_x = sources[2 * i];
            p.source_y = sources[2 * i + 1];
        }
    }
    return set;
}

}  // namespace lulc
