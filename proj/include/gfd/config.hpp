#pragma once

// Flat "key = value" configuration shared by every subcommand. Lines may
// carry '#' comments; blank lines are skipped; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfd/model.hpp"
#include "gfd/synth.hpp"
#include "gfd/trainer.hpp"

namespace gfd {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Every recognized key, in documentation order.
const std::vector<ConfigKey>& config_keys();

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Config {
public:
    Config();

    void set(const std::string& key, const std::string& value);
    void parse(const std::string& text, const std::string& origin = "config");
    void load(const std::filesystem::path& path);

    bool known(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;

    /// One "key = value" line per key, in documentation order.
    std::string dump() const;

private:
    std::map<std::string, std::string> values_;
};

ModelConfig model_config(const Config& c);
TrainOptions train_options(const Config& c);
EvalSettings eval_settings(const Config& c);
SynthSpec synth_spec(const Config& c);
PreprocessOptions preprocess_options(const Config& c);

}  // namespace gfd
