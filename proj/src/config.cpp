#include "gfd/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gfd {

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"seed", "0", "global seed; GFD_SEED is used when neither file nor flag sets it"},
        {"data", "data", "dataset root (synth writes here, train reads here)"},
        {"eval_data", "", "dataset root for eval; empty means data"},
        {"checkpoint", "model.ckpt", "checkpoint path"},
        {"train_log", "train_log.csv", "per-step training log"},
        {"curve_csv", "curve.csv", "miss-rate/FPPI curve written by eval"},
        {"detections_csv", "detections.csv", "detections written by eval, pixel units"},

        {"variant", "gated", "single|stack|gated|mixed_even|mixed_odd|mixed_early|mixed_late"},
        {"gfu", "v2", "gated fusion unit version: v1|v2"},
        {"modality", "color", "input stream of the single variant: color|thermal"},
        {"reference_size", "0", "300 or 512 selects the full-size SSD grid; 0 uses the toy grid"},
        {"input_size", "64", "toy input side length in pixels"},
        {"levels", "8,4,2,1", "toy pyramid side lengths"},
        {"anchors", "4,6,6,4", "anchors per location for each toy level (4 or 6)"},
        {"channels", "16", "channels of every pyramid level"},
        {"stem_channels", "8", "channels of the downsampling stem"},
        {"scale_min", "0.15", "anchor scale of the first level"},
        {"scale_max", "0.9", "anchor scale of the last level"},

        {"steps", "1000", "SGD steps"},
        {"batch_size", "4", "images per step"},
        {"lr", "0.001", "learning rate"},
        {"momentum", "0", "SGD momentum; 0 is plain SGD"},
        {"alpha", "5", "classification loss weight"},
        {"beta", "10", "localization loss weight"},
        {"gamma", "1", "L2 regularization weight"},
        {"ohem_ratio", "3", "hard negatives per positive"},
        {"match_iou", "0.5", "anchor/ground-truth IoU for a positive match"},
        {"augment", "true", "photometric, flip and resize augmentation"},
        {"augment_probability", "0.5", "probability of each augmentation"},
        {"enhance_thermal", "false", "CLAHE on thermal frames before training and eval"},
        {"clahe_tiles", "8", "CLAHE tiles per side"},
        {"clahe_clip", "2", "CLAHE clip limit"},

        {"iou_threshold", "0.5", "detection/ground-truth IoU counted as a hit"},
        {"ignore_classes", "", "comma list of raw classes flagged ignore (person,people,cyclist,person?)"},
        {"min_gt_height", "0", "ground truths shorter than this (pixels) are flagged ignore"},
        {"fppi_samples", "9", "log-spaced FPPI samples in [0.01, 1]"},
        {"score_threshold", "0.01", "minimum detection score"},
        {"nms_threshold", "0.45", "NMS IoU threshold"},
        {"top_k", "200", "candidates kept before NMS"},
        {"max_detections", "100", "detections kept per image"},
        {"eval_batch", "16", "images per forward pass in eval"},

        {"synth_count", "8", "synthetic pairs"},
        {"synth_width", "64", "synthetic frame width"},
        {"synth_height", "64", "synthetic frame height"},
        {"synth_min_objects", "1", "objects per frame, lower bound"},
        {"synth_max_objects", "3", "objects per frame, upper bound"},
        {"synth_visibility", "both", "both|color_only|thermal_only|mixed:<color-only probability>"},
        {"synth_noise", "8", "pixel noise standard deviation"},
        {"synth_min_height", "16", "object height lower bound, pixels"},
        {"synth_max_height", "32", "object height upper bound, pixels"},
        {"synth_min_aspect", "0.4", "object width/height lower bound"},
        {"synth_max_aspect", "0.6", "object width/height upper bound"},
        {"synth_max_overlap", "0.1", "IoU allowed between objects of one frame"},
        {"synth_night_fraction", "0.5", "fraction of frames tagged night"},
    };
    return keys;
}

Config::Config() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("config key '" + key + "': '" + text + "' is not a valid number");
    return v;
}

}  // namespace

void Config::parse(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!known(key))
            throw ConfigError(origin + ":" + std::to_string(number) + ": unknown config key '" + key +
                              "'");
        values_[key] = trim(line.substr(eq + 1));
    }
}

void Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    parse(ss.str(), path.string());
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

int Config::get_int(const std::string& key) const { return parse_number<int>(key, get(key)); }

std::uint64_t Config::get_u64(const std::string& key) const {
    return parse_number<std::uint64_t>(key, get(key));
}

double Config::get_double(const std::string& key) const {
    return parse_number<double>(key, get(key));
}

bool Config::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : get_list(key)) out.push_back(parse_number<int>(key, item));
    return out;
}

std::string Config::dump() const {
    std::string out;
    for (const auto& k : config_keys()) out += k.name + " = " + values_.at(k.name) + "\n";
    return out;
}

namespace {

template <typename F>
auto checked(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

}  // namespace

ModelConfig model_config(const Config& c) {
    ModelConfig m;
    m.variant = checked("variant", [&] { return parse_variant(c.get("variant")); });
    m.gfu_version = checked("gfu", [&] { return parse_gfu_version(c.get("gfu")); });
    m.single_modality = checked("modality", [&] { return parse_modality(c.get("modality")); });
    m.reference_size = c.get_int("reference_size");
    if (m.reference_size != 0 && m.reference_size != 300 && m.reference_size != 512)
        throw ConfigError("config key 'reference_size': expected 0, 300 or 512");
    m.input_size = c.get_int("input_size");
    m.level_sizes = c.get_int_list("levels");
    m.anchors_per_loc = c.get_int_list("anchors");
    m.level_channels = c.get_int("channels");
    m.stem_channels = c.get_int("stem_channels");
    m.scales = {c.get_double("scale_min"), c.get_double("scale_max")};
    if (m.level_channels < 1 || m.stem_channels < 1)
        throw ConfigError("config keys 'channels' and 'stem_channels' must be positive");
    if (!(m.scales.min > 0.0 && m.scales.min < m.scales.max && m.scales.max <= 1.0))
        throw ConfigError("anchor scales need 0 < scale_min < scale_max <= 1");
    checked("levels", [&] {
        m.geometry();
        return 0;
    });
    return m;
}

PreprocessOptions preprocess_options(const Config& c) {
    PreprocessOptions p;
    p.enhance_thermal = c.get_bool("enhance_thermal");
    p.clahe_tiles = c.get_int("clahe_tiles");
    p.clahe_clip = c.get_double("clahe_clip");
    if (p.clahe_tiles < 1) throw ConfigError("config key 'clahe_tiles' must be at least 1");
    if (!(p.clahe_clip > 0.0)) throw ConfigError("config key 'clahe_clip' must be positive");
    return p;
}

TrainOptions train_options(const Config& c) {
    TrainOptions t;
    t.weights = {c.get_double("alpha"), c.get_double("beta"), c.get_double("gamma")};
    if (t.weights.alpha < 0 || t.weights.beta < 0 || t.weights.gamma < 0)
        throw ConfigError("loss weights must be non-negative");
    t.ohem_ratio = c.get_int("ohem_ratio");
    if (t.ohem_ratio < 1) throw ConfigError("config key 'ohem_ratio' must be at least 1");
    t.match_iou = c.get_double("match_iou");
    if (!(t.match_iou > 0.0 && t.match_iou < 1.0))
        throw ConfigError("config key 'match_iou' must lie in (0, 1)");
    t.learning_rate = c.get_double("lr");
    t.momentum = c.get_double("momentum");
    if (t.learning_rate < 0) throw ConfigError("config key 'lr' must be non-negative");
    if (t.momentum < 0 || t.momentum >= 1) throw ConfigError("config key 'momentum' must lie in [0, 1)");
    t.steps = c.get_int("steps");
    if (t.steps < 1) throw ConfigError("config key 'steps' must be at least 1");
    t.batch_size = c.get_int("batch_size");
    if (t.batch_size < 1) throw ConfigError("config key 'batch_size' must be at least 1");
    t.seed = c.get_u64("seed");
    t.augment = c.get_bool("augment");
    t.augment_options.probability = c.get_double("augment_probability");
    if (t.augment_options.probability < 0 || t.augment_options.probability > 1)
        throw ConfigError("config key 'augment_probability' must lie in [0, 1]");
    t.preprocess = preprocess_options(c);
    return t;
}

EvalSettings eval_settings(const Config& c) {
    EvalSettings e;
    e.metrics.iou_threshold = c.get_double("iou_threshold");
    if (!(e.metrics.iou_threshold > 0.0 && e.metrics.iou_threshold <= 1.0))
        throw ConfigError("config key 'iou_threshold' must lie in (0, 1]");
    e.metrics.fppi_samples = c.get_int("fppi_samples");
    if (e.metrics.fppi_samples < 1) throw ConfigError("config key 'fppi_samples' must be at least 1");
    for (const auto& name : c.get_list("ignore_classes"))
        e.ignore_classes.insert(checked("ignore_classes", [&] { return parse_raw_class(name); }));
    e.min_gt_height = c.get_double("min_gt_height");
    e.predict.score_threshold = c.get_double("score_threshold");
    e.predict.nms_threshold = c.get_double("nms_threshold");
    const int top_k = c.get_int("top_k");
    const int max_det = c.get_int("max_detections");
    if (top_k < 1 || max_det < 1)
        throw ConfigError("config keys 'top_k' and 'max_detections' must be positive");
    e.predict.pre_nms_top_k = static_cast<std::size_t>(top_k);
    e.predict.max_detections = static_cast<std::size_t>(max_det);
    e.batch_size = c.get_int("eval_batch");
    if (e.batch_size < 1) throw ConfigError("config key 'eval_batch' must be at least 1");
    e.preprocess = preprocess_options(c);
    return e;
}

SynthSpec synth_spec(const Config& c) {
    SynthSpec s;
    s.count = c.get_int("synth_count");
    s.width = c.get_int("synth_width");
    s.height = c.get_int("synth_height");
    s.min_objects = c.get_int("synth_min_objects");
    s.max_objects = c.get_int("synth_max_objects");
    s.visibility =
        checked("synth_visibility", [&] { return VisibilityMode::parse(c.get("synth_visibility")); });
    s.noise = c.get_double("synth_noise");
    s.min_object_height = c.get_double("synth_min_height");
    s.max_object_height = c.get_double("synth_max_height");
    s.min_aspect = c.get_double("synth_min_aspect");
    s.max_aspect = c.get_double("synth_max_aspect");
    s.max_overlap = c.get_double("synth_max_overlap");
    s.night_fraction = c.get_double("synth_night_fraction");
    s.seed = c.get_u64("seed");
    if (s.count < 0 || s.width < 1 || s.height < 1)
        throw ConfigError("synthetic count must be non-negative and frame sizes positive");
    if (s.min_objects < 0 || s.max_objects < s.min_objects)
        throw ConfigError("synthetic object counts need 0 <= synth_min_objects <= synth_max_objects");
    return s;
}

}  // namespace gfd
