#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gfd/annotation.hpp"
#include "gfd/augment.hpp"
#include "gfd/dataset.hpp"
#include "gfd/enhance.hpp"
#include "gfd/image.hpp"
#include "gfd/synth.hpp"

using namespace gfd;
namespace fs = std::filesystem;

namespace {

Image random_image(int w, int h, int c, std::mt19937_64& rng) {
    Image img(w, h, c);
    std::uniform_int_distribution<int> b(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(b(rng));
    return img;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gfd_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
}

bool is_constant(const Image& img) {
    return std::all_of(img.pixels.begin(), img.pixels.end(), [&](auto v) { return v == img.pixels[0]; });
}

// Global equalization: round(255 * cdf(v) / N).
Image equalize_oracle(const Image& img) {
    std::vector<long long> hist(256, 0);
    for (auto v : img.pixels) ++hist[v];
    std::vector<long long> cdf(256);
    long long acc = 0;
    for (int b = 0; b < 256; ++b) cdf[b] = acc += hist[b];
    Image out = img;
    const double n = static_cast<double>(img.pixels.size());
    for (auto& v : out.pixels) v = static_cast<std::uint8_t>(std::lround(255.0 * cdf[v] / n));
    return out;
}

double mean_in(const Image& img, const PixelRect& r, int c) {
    double s = 0;
    int n = 0;
    for (int y = static_cast<int>(r.y); y < static_cast<int>(r.y + r.h); ++y)
        for (int x = static_cast<int>(r.x); x < static_cast<int>(r.x + r.w); ++x, ++n) s += img.at(x, y, c);
    return s / n;
}

}  // namespace

TEST_CASE("pnm roundtrip") {
    std::mt19937_64 rng(1);
    for (int c : {1, 3}) {
        const Image img = random_image(7, 5, c, rng);
        const std::string bytes = encode_pnm(img);
        CHECK(bytes.rfind(c == 1 ? "P5" : "P6", 0) == 0);
        CHECK(decode_pnm(bytes) == img);
    }
    CHECK(decode_pnm("P5\n# comment\n2 1\n255\nAB").pixels == std::vector<std::uint8_t>{'A', 'B'});
}

TEST_CASE("pnm errors") {
    CHECK_THROWS_AS(decode_pnm("P3\n1 1\n255\n0 0 0"), ImageError);
    CHECK_THROWS_AS(decode_pnm("P5\n4 4\n255\nshort"), ImageError);
    CHECK_THROWS_AS(decode_pnm("P5\n1 1\n65535\n\x01\x02"), ImageError);
    CHECK_THROWS_AS(decode_pnm("P5\nx 1\n255\n\x01"), ImageError);
}

TEST_CASE("image pairs") {
    const fs::path dir = scratch("pairs");
    std::mt19937_64 rng(2);
    write_pnm(dir / "c.ppm", random_image(4, 4, 3, rng));
    write_pnm(dir / "t.pgm", random_image(4, 4, 1, rng));
    write_pnm(dir / "big.pgm", random_image(8, 8, 1, rng));
    const ImagePair p = load_image_pair(dir / "c.ppm", dir / "t.pgm");
    CHECK(p.width() == 4);
    CHECK(p.height() == 4);
    CHECK(p.color == read_pnm(dir / "c.ppm"));
    CHECK_THROWS_AS(load_image_pair(dir / "c.ppm", dir / "big.pgm"), ImageError);
    CHECK_THROWS_AS(load_image_pair(dir / "t.pgm", dir / "t.pgm"), ImageError);

    std::string bytes = encode_pnm(random_image(4, 4, 1, rng));
    bytes.resize(bytes.size() - 3);
    write_bytes(dir / "cut.pgm", bytes);
    try {
        load_image_pair(dir / "c.ppm", dir / "cut.pgm");
        FAIL("expected truncation error");
    } catch (const ImageError& e) {
        CHECK(std::string(e.what()).find("trunc") != std::string::npos);
    }
    CHECK_THROWS_AS(read_pnm(dir / "missing.pgm"), ImageError);
}

TEST_CASE("annotation examples") {
    auto one = parse_annotations("person 10 20 30 60");
    REQUIRE(one.size() == 1);
    CHECK(one[0].raw_class == RawClass::person);
    CHECK(one[0].rect == PixelRect{10, 20, 30, 60});
    CHECK(parse_annotations("").empty());
    CHECK(parse_annotations("\n# only a comment\n\n").empty());

    auto unsure = parse_annotations("person? 5 5 10 20");
    REQUIRE(unsure.size() == 1);
    CHECK(unsure[0].raw_class == RawClass::person_uncertain);
    CHECK(to_string(RawClass::person_uncertain) == "person?");
    CHECK(parse_annotations("people 1 1 2 2\ncyclist 0 0 1.5 3")[1].raw_class == RawClass::cyclist);
}

TEST_CASE("annotation errors list every bad line") {
    try {
        parse_annotations("person 1 2 3 4\ndog 1 2 3 4\nperson a 2 3 4\nperson 1 2 0 4\nperson 1 2 3\n");
        FAIL("expected AnnotationError");
    } catch (const AnnotationError& e) {
        CHECK(e.lines() == std::vector<int>{2, 3, 4, 5});
    }
}

TEST_CASE("annotation roundtrip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 500.0);
    const RawClass classes[] = {RawClass::person, RawClass::people, RawClass::cyclist, RawClass::person_uncertain};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GroundTruth> gts(trial % 6);
        for (auto& g : gts) {
            g.rect = {u(rng), u(rng), u(rng), u(rng)};
            if (trial % 2) g.rect = {std::round(g.rect.x), std::round(g.rect.y), std::ceil(g.rect.w), std::ceil(g.rect.h)};
            g.raw_class = classes[rng() % 4];
        }
        const auto back = parse_annotations(serialize_annotations(gts));
        REQUIRE(back.size() == gts.size());
        for (std::size_t i = 0; i < gts.size(); ++i) {
            CHECK(back[i].rect == gts[i].rect);
            CHECK(back[i].raw_class == gts[i].raw_class);
        }
        CHECK(serialize_annotations(back) == serialize_annotations(gts));
    }
}

TEST_CASE("box normalization and clamping") {
    const Box b = normalize({10, 20, 30, 60}, 100, 200);
    CHECK(b.cx == doctest::Approx(0.25));
    CHECK(b.cy == doctest::Approx(0.25));
    CHECK(b.w == doctest::Approx(0.3));
    CHECK(b.h == doctest::Approx(0.3));
    const PixelRect back = to_pixels(b, 100, 200);
    CHECK(back.x == doctest::Approx(10));
    CHECK(back.h == doctest::Approx(60));

    PixelRect r{-5, 90, 20, 20};
    CHECK(clamp_to_image(r, 100, 100));
    CHECK(r == PixelRect{0, 90, 15, 10});
    PixelRect gone{120, 10, 5, 5};
    CHECK_FALSE(clamp_to_image(gone, 100, 100));
}

TEST_CASE("clahe on constant images") {
    for (int v : {0, 17, 128, 255}) {
        const Image flat(32, 24, 1, static_cast<std::uint8_t>(v));
        const Image once = clahe(flat, 8, 8, 2.0);
        CHECK(is_constant(once));
        CHECK(is_constant(clahe(once, 8, 8, 2.0)));
        CHECK(is_constant(clahe(flat, 3, 2, 40.0)));
    }
}

TEST_CASE("clahe without clipping on one tile is global equalization") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Image img(20 + trial, 16, 1);
        std::uniform_int_distribution<int> b(40, 40 + 10 * (trial + 1));
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(b(rng));
        CHECK(clahe(img, 1, 1, 1e9) == equalize_oracle(img));
    }
}

TEST_CASE("clahe widens a low-contrast ramp") {
    Image ramp(64, 64, 1);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) ramp.at(x, y) = static_cast<std::uint8_t>(100 + (x + y) / 8);
    const Image out = clahe(ramp, 8, 8, 2.0);
    const auto [in_lo, in_hi] = std::minmax_element(ramp.pixels.begin(), ramp.pixels.end());
    const auto [out_lo, out_hi] = std::minmax_element(out.pixels.begin(), out.pixels.end());
    CHECK(*out_hi - *out_lo > *in_hi - *in_lo);
}

TEST_CASE("clahe argument checks") {
    const Image small(4, 4, 1, 9);
    CHECK_THROWS_AS(clahe(small, 8, 8, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(clahe(small, 0, 1, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(clahe(small, 1, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(clahe(Image(8, 8, 3), 1, 1, 2.0), std::invalid_argument);
}

namespace {

ImagePair random_pair(std::mt19937_64& rng, int w = 40, int h = 30) {
    ImagePair p;
    p.color = random_image(w, h, 3, rng);
    p.thermal = random_image(w, h, 1, rng);
    p.id = "x";
    return p;
}

std::vector<GroundTruth> some_boxes() {
    return {{{2, 3, 8, 12}, RawClass::person, Visibility::both},
            {{20, 5, 10, 20}, RawClass::cyclist, Visibility::both}};
}

}  // namespace

TEST_CASE("augmentation identity and determinism") {
    std::mt19937_64 rng(5);
    const ImagePair p = random_pair(rng);
    const auto gts = some_boxes();
    const Augmented same = apply_augmentation(p, gts, AugmentPlan{});
    CHECK(same.pair.color == p.color);
    CHECK(same.pair.thermal == p.thermal);
    REQUIRE(same.gts.size() == gts.size());
    for (std::size_t i = 0; i < gts.size(); ++i) CHECK(same.gts[i].rect == gts[i].rect);

    AugmentOptions never;
    never.probability = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) CHECK(plan_augmentation(s, never).is_identity());

    for (std::uint64_t s = 0; s < 20; ++s) {
        const Augmented a = augment(p, gts, s), b = augment(p, gts, s);
        CHECK(a.pair.color == b.pair.color);
        CHECK(a.pair.thermal == b.pair.thermal);
        REQUIRE(a.gts.size() == b.gts.size());
        for (std::size_t i = 0; i < a.gts.size(); ++i) CHECK(a.gts[i].rect == b.gts[i].rect);
    }
    CHECK(sample_seed(1, "a", 0) == sample_seed(1, "a", 0));
    CHECK(sample_seed(1, "a", 0) != sample_seed(1, "a", 1));
    CHECK(sample_seed(1, "a", 0) != sample_seed(1, "b", 0));
}

TEST_CASE("augmentation draws each transform about half the time") {
    int fired = 0, flips = 0;
    const int n = 2000;
    for (int s = 0; s < n; ++s) {
        const AugmentPlan plan = plan_augmentation(static_cast<std::uint64_t>(s));
        fired += plan.brightness;
        flips += plan.flip;
        CHECK(std::abs(plan.brightness_shift) <= 32.0);
        CHECK(plan.resize_scale >= 0.8);
        CHECK(plan.resize_scale <= 1.2);
    }
    CHECK(std::abs(fired / double(n) - 0.5) < 0.05);
    CHECK(std::abs(flips / double(n) - 0.5) < 0.05);
}

TEST_CASE("horizontal flip") {
    std::mt19937_64 rng(6);
    const ImagePair p = random_pair(rng);
    auto gts = some_boxes();
    ImagePair q = p;
    flip_horizontal(q, gts);
    for (int y = 0; y < p.height(); ++y)
        for (int x = 0; x < p.width(); ++x) {
            CHECK(q.thermal.at(x, y) == p.thermal.at(p.width() - 1 - x, y));
            CHECK(q.color.at(x, y, 1) == p.color.at(p.width() - 1 - x, y, 1));
        }
    const auto orig = some_boxes();
    for (std::size_t i = 0; i < gts.size(); ++i) {
        const Box a = normalize(orig[i].rect, p.width(), p.height());
        const Box b = normalize(gts[i].rect, p.width(), p.height());
        CHECK(b.cx == doctest::Approx(1.0 - a.cx));
        CHECK(b.cy == doctest::Approx(a.cy));
    }
    flip_horizontal(q, gts);
    CHECK(q.color == p.color);
    CHECK(q.thermal == p.thermal);
    for (std::size_t i = 0; i < gts.size(); ++i) CHECK(gts[i].rect == orig[i].rect);
}

TEST_CASE("photometric transforms leave thermal alone") {
    std::mt19937_64 rng(7);
    const ImagePair p = random_pair(rng);
    AugmentPlan plan;
    plan.brightness = true;
    plan.brightness_shift = 20;
    plan.contrast = true;
    plan.contrast_factor = 1.3;
    plan.hue = true;
    plan.hue_shift = 0.05;
    plan.saturation = true;
    plan.saturation_factor = 0.7;
    plan.permute = true;
    plan.channel_order = {2, 0, 1};
    const Augmented a = apply_augmentation(p, some_boxes(), plan);
    CHECK(a.pair.thermal == p.thermal);
    CHECK(a.pair.color != p.color);
    for (std::size_t i = 0; i < a.gts.size(); ++i) CHECK(a.gts[i].rect == some_boxes()[i].rect);
}

TEST_CASE("augmented boxes stay inside the image") {
    std::mt19937_64 rng(8);
    const ImagePair p = random_pair(rng, 32, 32);
    std::vector<GroundTruth> gts{{{0, 0, 6, 10}}, {{26, 22, 6, 10}}, {{12, 12, 8, 8}}};
    for (std::uint64_t s = 0; s < 200; ++s) {
        const Augmented a = augment(p, gts, s);
        CHECK(a.pair.width() == 32);
        CHECK(a.pair.thermal.width == 32);
        CHECK(a.gts.size() + a.warnings.size() == gts.size());
        for (const auto& g : a.gts) {
            CHECK(g.rect.x >= 0.0);
            CHECK(g.rect.y >= 0.0);
            CHECK(g.rect.w > 0.0);
            CHECK(g.rect.h > 0.0);
            CHECK(g.rect.x + g.rect.w <= 32.0 + 1e-9);
            CHECK(g.rect.y + g.rect.h <= 32.0 + 1e-9);
        }
    }
}

TEST_CASE("synthetic data") {
    SynthSpec none;
    none.min_objects = none.max_objects = 0;
    for (const auto& s : synth_dataset(none)) CHECK(s.gts.empty());

    SynthSpec spec;
    spec.count = 20;
    spec.seed = 3;
    const auto a = synth_dataset(spec), b = synth_dataset(spec);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pair.color == b[i].pair.color);
        CHECK(a[i].pair.thermal == b[i].pair.thermal);
        CHECK(a[i].gts.size() == b[i].gts.size());
        CHECK(a[i].pair.time_tag != TimeTag::unknown);
    }
    spec.seed = 4;
    CHECK(synth_dataset(spec)[0].pair.thermal != a[0].pair.thermal);
}

TEST_CASE("visibility both: objects stand out in each channel") {
    SynthSpec spec;
    spec.count = 30;
    spec.seed = 9;
    for (const auto& s : synth_dataset(spec)) {
        double bg[4] = {0, 0, 0, 0};
        for (int c = 0; c < 3; ++c) {
            double acc = 0;
            for (std::size_t p = 0; p < s.pair.color.pixels.size() / 3; ++p) acc += s.pair.color.pixels[p * 3 + c];
            bg[c] = acc / (s.pair.color.pixels.size() / 3);
        }
        double acc = 0;
        for (auto v : s.pair.thermal.pixels) acc += v;
        bg[3] = acc / s.pair.thermal.pixels.size();
        for (const auto& g : s.gts) {
            CHECK(g.visibility == Visibility::both);
            double color_gap = 0;
            for (int c = 0; c < 3; ++c) color_gap = std::max(color_gap, std::abs(mean_in(s.pair.color, g.rect, c) - bg[c]));
            CHECK(color_gap > 3 * spec.noise);
            CHECK(mean_in(s.pair.thermal, g.rect, 0) - bg[3] > 3 * spec.noise);
        }
    }
}

TEST_CASE("single-modality objects are invisible in the other channel") {
    SynthSpec spec;
    spec.count = 40;
    spec.seed = 10;
    spec.visibility = VisibilityMode::parse("color_only");
    for (const auto& s : synth_dataset(spec))
        for (const auto& g : s.gts) CHECK(mean_in(s.pair.thermal, g.rect, 0) < 120);
    spec.visibility = VisibilityMode::parse("thermal_only");
    for (const auto& s : synth_dataset(spec))
        for (const auto& g : s.gts) CHECK(mean_in(s.pair.thermal, g.rect, 0) > 150);
}

TEST_CASE("mixed visibility fraction") {
    SynthSpec spec;
    spec.count = 400;
    spec.min_objects = 2;
    spec.max_objects = 3;
    spec.seed = 21;
    spec.visibility = VisibilityMode::parse("mixed:0.5");
    int total = 0, color_only = 0;
    for (const auto& s : synth_dataset(spec))
        for (const auto& g : s.gts) {
            ++total;
            color_only += g.visibility == Visibility::color_only;
            CHECK(g.visibility != Visibility::both);
        }
    REQUIRE(total >= 1000);
    const double frac = static_cast<double>(color_only) / total;
    CHECK(frac >= 0.44);
    CHECK(frac <= 0.56);
    CHECK(VisibilityMode::parse("mixed:0.25").str() == "mixed:0.25");
    CHECK_THROWS(VisibilityMode::parse("mixed:2"));
    CHECK_THROWS(VisibilityMode::parse("sometimes"));
}

TEST_CASE("crowded scenes place fewer objects with a warning") {
    SynthSpec spec;
    spec.count = 3;
    spec.min_objects = spec.max_objects = 40;
    spec.max_overlap = 0.0;
    std::vector<std::string> warnings;
    const auto data = synth_dataset(spec, &warnings);
    CHECK(warnings.size() == 3);
    for (const auto& s : data) CHECK(s.gts.size() < 40);
}

TEST_CASE("dataset directory roundtrip") {
    const fs::path root = scratch("dataset");
    SynthSpec spec;
    spec.count = 5;
    spec.seed = 2;
    const auto data = synth_dataset(spec);
    write_dataset(root, data);
    CHECK(fs::exists(root / "color" / "s00000.ppm"));
    CHECK(fs::exists(root / "thermal" / "s00000.pgm"));
    CHECK(fs::exists(root / "ann" / "s00000.txt"));
    CHECK(fs::exists(root / "meta.csv"));
    const auto back = load_dataset(root);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].pair.id == data[i].pair.id);
        CHECK(back[i].pair.color == data[i].pair.color);
        CHECK(back[i].pair.thermal == data[i].pair.thermal);
        CHECK(back[i].pair.time_tag == data[i].pair.time_tag);
        REQUIRE(back[i].gts.size() == data[i].gts.size());
        for (std::size_t k = 0; k < data[i].gts.size(); ++k) CHECK(back[i].gts[k].rect == data[i].gts[k].rect);
    }

    fs::remove(root / "meta.csv");
    for (const auto& s : load_dataset(root)) CHECK(s.pair.time_tag == TimeTag::unknown);

    write_bytes(root / "ann" / "s00001.txt", "person 1 2 3\n");
    CHECK_THROWS_AS(load_dataset(root), AnnotationError);
    CHECK_THROWS(load_dataset(root / "nowhere"));
}
