#include "bsce/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "bsce/binio.hpp"
#include "bsce/rng.hpp"

namespace bsce {

namespace {

constexpr std::string_view kDatasetMagic = "BSCEDS1";

// Stream tags for deriving independent RNG sequences from the dataset seed.
enum : std::uint64_t {
    kProtoStream = 1,
    kTrainStream = 2,
    kValStream = 3,
    kTestStream = 4,
    kNoiseStream = 5,
};

}  // namespace

void DatasetSpec::validate() const {
    if (classes < 2) throw ConfigError("dataset spec: classes must be >= 2");
    if (head_count < 1)
        throw ConfigError("dataset spec: head_count must be >= 1");
    if (!(std::isfinite(imbalance_ratio) && imbalance_ratio >= 1.0))
        throw ConfigError("dataset spec: imbalance_ratio must be >= 1");
    if (static_cast<Real>(head_count) / imbalance_ratio < 1.0)
        throw ConfigError(
            "dataset spec: head_count / imbalance_ratio must be >= 1");
    if (!(std::isfinite(noise_rate) && noise_rate >= 0.0 && noise_rate < 1.0))
        throw ConfigError("dataset spec: noise_rate must lie in [0, 1)");
    if (image_side < 2)
        throw ConfigError("dataset spec: image_side must be >= 2");
    if (!(std::isfinite(pixel_noise) && pixel_noise >= 0.0))
        throw ConfigError("dataset spec: pixel_noise must be >= 0");
    if (val_per_class < 1 || test_per_class < 1)
        throw ConfigError("dataset spec: val/test samples per class must be >= 1");
}

std::size_t Dataset::image_side() const {
    if (train.empty()) throw InvalidInputError("dataset has no train split");
    return train.front().pixels.side();
}

std::vector<Count> long_tail_counts(const DatasetSpec& spec) {
    spec.validate();
    std::vector<Count> counts(spec.classes);
    const Real k_max = static_cast<Real>(spec.classes - 1);
    for (std::size_t k = 0; k < spec.classes; ++k) {
        const Real frac = static_cast<Real>(k) / k_max;
        const Real raw = static_cast<Real>(spec.head_count) *
                         std::pow(spec.imbalance_ratio, -frac);
        const long long rounded = std::llround(raw);
        if (rounded < 1)
            throw ConfigError("dataset spec: class " + std::to_string(k) +
                              " rounds below one sample");
        counts[k] = static_cast<Count>(rounded);
    }
    return counts;
}

namespace {

// Smooth prototype: a few random cosine waves, min-max normalized into
// [0.2, 0.8] so sample perturbations rarely hit the clip boundary.
std::vector<double> make_prototype(Rng& rng, std::size_t side) {
    constexpr int kWaves = 3;
    constexpr double two_pi = 6.283185307179586476925286766559;
    struct Wave {
        double amp, fr, fc, phase;
    };
    Wave waves[kWaves];
    for (Wave& w : waves) {
        w.amp = rng.uniform(0.5, 1.0);
        w.fr = rng.uniform(0.5, 3.0);
        w.fc = rng.uniform(0.5, 3.0);
        w.phase = rng.uniform(0.0, two_pi);
    }
    std::vector<double> proto(side * side);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            double v = 0.0;
            const double rr = static_cast<double>(r) / static_cast<double>(side);
            const double cc = static_cast<double>(c) / static_cast<double>(side);
            for (const Wave& w : waves)
                v += w.amp * std::cos(two_pi * (w.fr * rr + w.fc * cc) + w.phase);
            proto[r * side + c] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-9) {
        std::fill(proto.begin(), proto.end(), 0.5);
        return proto;
    }
    for (double& v : proto) v = 0.2 + 0.6 * (v - lo) / (hi - lo);
    return proto;
}

LabeledImage make_sample(Rng& rng, const std::vector<double>& proto,
                         std::size_t side, Real sigma, ClassIndex label) {
    LabeledImage img;
    img.pixels = Grid(side, side);
    for (std::size_t i = 0; i < proto.size(); ++i) {
        const double v = proto[i] + sigma * rng.normal();
        img.pixels.pix[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    img.true_label = label;
    img.observed_label = label;
    return img;
}

}  // namespace

Dataset synth_dataset(const DatasetSpec& spec) {
    const std::vector<Count> counts = long_tail_counts(spec);  // validates

    Rng proto_rng(mix_seed(spec.seed, kProtoStream));
    std::vector<std::vector<double>> protos;
    protos.reserve(spec.classes);
    for (std::size_t k = 0; k < spec.classes; ++k)
        protos.push_back(make_prototype(proto_rng, spec.image_side));

    Dataset d;
    d.classes = spec.classes;

    Rng train_rng(mix_seed(spec.seed, kTrainStream));
    for (std::size_t k = 0; k < spec.classes; ++k)
        for (Count i = 0; i < counts[k]; ++i)
            d.train.push_back(make_sample(train_rng, protos[k], spec.image_side,
                                          spec.pixel_noise, k));

    Rng val_rng(mix_seed(spec.seed, kValStream));
    for (std::size_t k = 0; k < spec.classes; ++k)
        for (std::size_t i = 0; i < spec.val_per_class; ++i)
            d.val.push_back(make_sample(val_rng, protos[k], spec.image_side,
                                        spec.pixel_noise, k));

    Rng test_rng(mix_seed(spec.seed, kTestStream));
    for (std::size_t k = 0; k < spec.classes; ++k)
        for (std::size_t i = 0; i < spec.test_per_class; ++i)
            d.test.push_back(make_sample(test_rng, protos[k], spec.image_side,
                                         spec.pixel_noise, k));

    if (spec.noise_rate > 0.0)
        d = inject_noise(std::move(d), spec.noise_rate, spec.seed,
                         spec.noise_model);
    return d;
}

Dataset inject_noise(Dataset d, Real eta, std::uint64_t seed,
                     NoiseModel model) {
    if (!(std::isfinite(eta) && eta >= 0.0 && eta < 1.0))
        throw InvalidInputError("inject_noise: eta must lie in [0, 1)");
    if (d.classes < 2)
        throw InvalidInputError("inject_noise: dataset needs >= 2 classes");

    Rng rng(mix_seed(seed, kNoiseStream));
    for (LabeledImage& img : d.train) {
        if (rng.uniform() >= eta) continue;
        if (model == NoiseModel::Symmetric) {
            // Uniform over the K-1 classes other than the true one.
            const std::uint64_t r = rng.below(d.classes - 1);
            img.observed_label = r >= img.true_label ? r + 1 : r;
        } else {
            img.observed_label = (img.true_label + 1) % d.classes;
        }
    }
    return d;
}

std::vector<Count> class_counts(const Dataset& d) {
    if (d.train.empty())
        throw InvalidInputError("class_counts: empty train split");
    std::vector<Count> counts(d.classes, 0);
    for (const LabeledImage& img : d.train) {
        if (img.observed_label >= d.classes)
            throw InvalidInputError("class_counts: label out of range");
        ++counts[img.observed_label];
    }
    return counts;
}

namespace {

void write_split(std::ostream& os, const std::vector<LabeledImage>& split,
                 std::size_t rows, std::size_t cols, std::size_t classes) {
    for (const LabeledImage& img : split) {
        if (img.pixels.rows != rows || img.pixels.cols != cols)
            throw InvalidInputError("save_dataset: inconsistent image size");
        if (img.true_label >= classes || img.observed_label >= classes)
            throw InvalidInputError("save_dataset: label out of range");
        for (float v : img.pixels.pix) binio::write_f32(os, v);
        binio::write_u32(os, static_cast<std::uint32_t>(img.true_label));
        binio::write_u32(os, static_cast<std::uint32_t>(img.observed_label));
    }
}

std::vector<LabeledImage> read_split(std::istream& is, std::uint32_t n,
                                     std::uint32_t rows, std::uint32_t cols,
                                     std::uint32_t classes, bool clean_split) {
    std::vector<LabeledImage> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        LabeledImage img;
        img.pixels = Grid(rows, cols);
        for (float& v : img.pixels.pix) {
            v = binio::read_f32(is);
            if (!(v >= 0.0f && v <= 1.0f))
                throw CorruptDataError("dataset pixel outside [0, 1]");
        }
        img.true_label = binio::read_u32(is);
        img.observed_label = binio::read_u32(is);
        if (img.true_label >= classes || img.observed_label >= classes)
            throw CorruptDataError("dataset label out of range");
        if (clean_split && img.true_label != img.observed_label)
            throw CorruptDataError("val/test split carries a noisy label");
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    if (d.train.empty()) throw InvalidInputError("save_dataset: empty train split");
    const std::size_t side = d.image_side();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");

    binio::write_magic(os, kDatasetMagic);
    binio::write_u32(os, static_cast<std::uint32_t>(d.classes));
    binio::write_u32(os, static_cast<std::uint32_t>(side));
    binio::write_u32(os, static_cast<std::uint32_t>(side));
    binio::write_u32(os, static_cast<std::uint32_t>(d.train.size()));
    binio::write_u32(os, static_cast<std::uint32_t>(d.val.size()));
    binio::write_u32(os, static_cast<std::uint32_t>(d.test.size()));
    write_split(os, d.train, side, side, d.classes);
    write_split(os, d.val, side, side, d.classes);
    write_split(os, d.test, side, side, d.classes);
    if (!os) throw IoError("write failure on " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string() + " for reading");

    binio::expect_magic(is, kDatasetMagic);
    const std::uint32_t classes = binio::read_u32(is);
    const std::uint32_t rows = binio::read_u32(is);
    const std::uint32_t cols = binio::read_u32(is);
    const std::uint32_t n_train = binio::read_u32(is);
    const std::uint32_t n_val = binio::read_u32(is);
    const std::uint32_t n_test = binio::read_u32(is);
    if (classes < 2 || rows < 2 || rows != cols)
        throw CorruptDataError("dataset header fields out of range");

    Dataset d;
    d.classes = classes;
    d.train = read_split(is, n_train, rows, cols, classes, false);
    d.val = read_split(is, n_val, rows, cols, classes, true);
    d.test = read_split(is, n_test, rows, cols, classes, true);
    binio::expect_eof(is);
    return d;
}

}  // namespace bsce
