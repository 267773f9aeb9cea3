// gfd: synth / train / eval / anchors / enhance.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "gfd/checkpoint.hpp"
#include "gfd/config.hpp"
#include "gfd/dataset.hpp"
#include "gfd/enhance.hpp"
#include "gfd/image.hpp"
#include "gfd/model.hpp"
#include "gfd/synth.hpp"
#include "gfd/topology.hpp"
#include "gfd/trainer.hpp"

namespace {

using namespace gfd;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string key_table() {
    std::ostringstream ss;
    ss << "Config keys (config file lines \"key = value\"; every key is also a --<key> flag):\n";
    for (const auto& k : config_keys()) {
        std::string dflt = k.default_value.empty() ? "\"\"" : k.default_value;
        ss << "  " << k.name << std::string(k.name.size() < 22 ? 22 - k.name.size() : 1, ' ')
           << "default " << dflt << "  " << k.help << "\n";
    }
    ss << "Environment: GFD_SEED sets seed unless the config file or --seed does.";
    return ss.str();
}

struct Settings {
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
};

void add_config_options(CLI::App* sub, Settings& s) {
    sub->add_option("-c,--config", s.config_path, "config file of key = value lines");
    for (const auto& k : config_keys()) {
        const std::string dflt = k.default_value.empty() ? "\"\"" : k.default_value;
        s.options[k.name] = sub->add_option("--" + k.name, s.flags[k.name],
                                            k.help + " (default " + dflt + ")");
    }
}

Config resolve(const Settings& s) {
    Config c;
    if (const char* env = std::getenv("GFD_SEED")) {
        const std::string v = env;
        std::uint64_t seed = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
        if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw ConfigError("GFD_SEED='" + v + "' is not an unsigned integer");
        c.set("seed", v);
    }
    if (!s.config_path.empty()) c.load(s.config_path);
    for (const auto& [key, opt] : s.options)
        if (opt->count() > 0) c.set(key, s.flags.at(key));
    return c;
}

int cmd_synth(const Config& c) {
    const SynthSpec spec = synth_spec(c);
    std::vector<std::string> warnings;
    const auto samples = synth_dataset(spec, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    write_dataset(c.get("data"), samples);
    std::size_t objects = 0;
    for (const auto& s : samples) objects += s.gts.size();
    std::cout << "wrote " << samples.size() << " pairs (" << objects << " objects, visibility "
              << spec.visibility.str() << ") to " << c.get("data") << "\n";
    return 0;
}

int cmd_train(const Config& c) {
    const ModelConfig mc = model_config(c);
    const TrainOptions opts = train_options(c);
    const auto data = load_dataset(c.get("data"));
    Detector model(mc, opts.seed);

    std::ostringstream log;
    const TrainResult r = train(model, data, opts, &log);
    write_text(c.get("train_log"), log.str());
    save_checkpoint(c.get("checkpoint"), model);

    if (!r.warnings.empty())
        std::cerr << "warning: augmentation dropped " << r.warnings.size() << " boxes\n";
    const LossBreakdown b = r.last();
    std::cout << "model " << mc.describe() << "\n";
    std::cout << "fingerprint " << mc.fingerprint() << "\n";
    std::cout << "steps=" << opts.steps << " L_cls=" << num(b.cls) << " L_loc=" << num(b.loc)
              << " L2=" << num(b.l2) << " L_total=" << num(b.total) << "\n";
    std::cout << "checkpoint " << c.get("checkpoint") << "\n";
    return 0;
}

int cmd_eval(const Config& c) {
    const ModelConfig mc = model_config(c);
    const EvalSettings settings = eval_settings(c);
    const std::string root = c.get("eval_data").empty() ? c.get("data") : c.get("eval_data");
    Detector model(mc, c.get_u64("seed"));
    load_checkpoint(c.get("checkpoint"), model);
    const auto data = load_dataset(root);
    const ModelEvaluation ev = evaluate_model(model, data, settings);

    std::string curve = "fppi,miss_rate\n";
    for (const auto& p : ev.result.curve) curve += num(p.fppi) + "," + num(p.miss_rate) + "\n";
    write_text(c.get("curve_csv"), curve);

    std::string dets = "image_id,cx,cy,w,h,score\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = data[i].pair.width(), h = data[i].pair.height();
        for (const auto& d : ev.detections[i])
            dets += data[i].pair.id + "," + num(d.box.cx * w) + "," + num(d.box.cy * h) + "," +
                    num(d.box.w * w) + "," + num(d.box.h * h) + "," + num(d.score) + "\n";
    }
    write_text(c.get("detections_csv"), dets);

    std::vector<std::vector<EvalGroundTruth>> gts;
    std::vector<std::string> tags;
    for (const auto& s : data) {
        gts.push_back(eval_ground_truths(s.gts, s.pair.width(), s.pair.height(), settings));
        tags.push_back(to_string(s.pair.time_tag));
    }
    std::cout << "images=" << data.size() << "\n";
    for (const char* tag : {"day", "night"}) {
        const std::size_t n = std::count(tags.begin(), tags.end(), tag);
        if (n == 0) continue;
        const EvalResult r = evaluate_tagged(ev.detections, gts, tags, tag, settings.metrics);
        std::cout << "logMR_" << tag << "=" << num(r.log_mr) << "\n";
    }
    std::cout << "logMR=" << num(ev.result.log_mr) << "\n";
    return 0;
}

int cmd_anchors(Config c, int size, const std::string& csv_path) {
    if (size == 300 || size == 512) {
        c.set("reference_size", std::to_string(size));
    } else if (size > 0) {
        c.set("reference_size", "0");
        c.set("input_size", std::to_string(size));
    }
    const ModelConfig mc = model_config(c);
    const FusionTopology t = build_topology(mc.variant, mc.geometry(), mc.gfu_version);

    std::string csv = "head,height,width,anchors_per_location,anchors\n";
    std::cout << "variant " << to_string(t.variant) << ", input " << t.geometry.input_size << "\n";
    std::cout << "head              map       per-loc  anchors\n";
    for (const auto& hm : t.head_maps()) {
        const PyramidLevel& l = t.geometry.levels[hm.level];
        const std::string name = l.name + stream_suffix(hm.stream);
        const std::int64_t n = l.locations() * l.anchors_per_loc;
        const std::string map = std::to_string(l.height) + "x" + std::to_string(l.width);
        std::cout << name << std::string(name.size() < 18 ? 18 - name.size() : 1, ' ') << map
                  << std::string(map.size() < 10 ? 10 - map.size() : 1, ' ') << l.anchors_per_loc
                  << "        " << n << "\n";
        csv += name + "," + std::to_string(l.height) + "," + std::to_string(l.width) + "," +
               std::to_string(l.anchors_per_loc) + "," + std::to_string(n) + "\n";
    }
    const std::int64_t total = anchor_count(t);
    csv += "total,,,," + std::to_string(total) + "\n";
    if (!csv_path.empty()) write_text(csv_path, csv);
    std::cout << "total=" << total << "\n";
    return 0;
}

int cmd_enhance(const Config& c, const std::string& in, const std::string& out) {
    const PreprocessOptions p = preprocess_options(c);
    const Image img = read_pnm(in);
    if (img.channels != 1) throw UsageError("enhance expects a graymap (P5) input");
    write_pnm(out, clahe(img, p.clahe_tiles, p.clahe_tiles, p.clahe_clip));
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gated fusion double SSD: synthetic data, training, evaluation, anchor budgets."};
    app.require_subcommand(1, 1);
    app.footer(key_table());

    Settings synth_s, train_s, eval_s, anchors_s, enhance_s;
    auto* synth = app.add_subcommand("synth", "write a synthetic color/thermal dataset to <data>");
    add_config_options(synth, synth_s);
    auto* train_cmd = app.add_subcommand("train", "train on <data>, write <checkpoint> and <train_log>");
    add_config_options(train_cmd, train_s);
    auto* eval = app.add_subcommand("eval", "evaluate <checkpoint>; prints logMR=<v> last");
    add_config_options(eval, eval_s);
    auto* anchors = app.add_subcommand("anchors", "print per-head anchor counts and the total");
    int size = 0;
    std::string csv_path;
    anchors->add_option("--size", size, "300 or 512 for the reference grid, otherwise a toy input size");
    anchors->add_option("--csv", csv_path, "also write the table as CSV");
    add_config_options(anchors, anchors_s);
    auto* enhance = app.add_subcommand("enhance", "CLAHE on a graymap");
    std::string in_path, out_path;
    enhance->add_option("input", in_path, "input .pgm")->required();
    enhance->add_option("output", out_path, "output .pgm")->required();
    add_config_options(enhance, enhance_s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) return cmd_synth(resolve(synth_s));
        if (*train_cmd) return cmd_train(resolve(train_s));
        if (*eval) return cmd_eval(resolve(eval_s));
        if (*anchors) return cmd_anchors(resolve(anchors_s), size, csv_path);
        if (*enhance) return cmd_enhance(resolve(enhance_s), in_path, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
