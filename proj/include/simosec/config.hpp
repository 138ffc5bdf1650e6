// Flat `key = value` configuration files with dotted section keys.
// Every simulation parameter has a named key; the shipped defaults are the
// experiment settings used throughout (see README for the full key list).
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simosec/autoenc.hpp"
#include "simosec/channel.hpp"
#include "simosec/impair.hpp"
#include "simosec/rng.hpp"

namespace simosec::harness {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class KeyValueConfig {
  public:
    static KeyValueConfig parse(std::istream &is) {
        KeyValueConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty())
                throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
            cfg.kv_[key] = val;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string &path) {
        std::ifstream is(path);
        if (!is)
            throw std::runtime_error("cannot open config file: " + path);
        return parse(is);
    }

    std::string serialize() const {
        std::ostringstream os;
        for (const auto &[k, v] : kv_)
            os << k << " = " << v << "\n";
        return os.str();
    }

    bool has(const std::string &key) const { return kv_.count(key) != 0; }

    void set(const std::string &key, const std::string &value) { kv_[key] = value; }
    void set(const std::string &key, const char *value) { kv_[key] = value; }
    void set(const std::string &key, double value) { kv_[key] = format_double(value); }
    void set(const std::string &key, int value) { kv_[key] = std::to_string(value); }
    void set(const std::string &key, long long value) { kv_[key] = std::to_string(value); }
    void set(const std::string &key, std::uint64_t value) { kv_[key] = std::to_string(value); }
    void set(const std::string &key, bool value) { kv_[key] = value ? "true" : "false"; }

    std::string get_string(const std::string &key, const std::string &dflt) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? dflt : it->second;
    }

    double get_double(const std::string &key, double dflt) const {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            return dflt;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size())
                throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw std::runtime_error("config key '" + key + "': not a number: " + it->second);
        }
    }

    long long get_int(const std::string &key, long long dflt) const {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            return dflt;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size())
                throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw std::runtime_error("config key '" + key + "': not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string &key, bool dflt) const {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            return dflt;
        if (it->second == "true" || it->second == "1")
            return true;
        if (it->second == "false" || it->second == "0")
            return false;
        throw std::runtime_error("config key '" + key + "': not a boolean: " + it->second);
    }

    std::vector<std::string> get_list(const std::string &key,
                                      const std::vector<std::string> &dflt) const {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            return dflt;
        std::vector<std::string> out;
        std::string item;
        std::istringstream is(it->second);
        while (std::getline(is, item, ',')) {
            item = trim(item);
            if (!item.empty())
                out.push_back(item);
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string &key, const std::vector<double> &dflt) const {
        if (!has(key))
            return dflt;
        std::vector<double> out;
        for (const std::string &s : get_list(key, {})) {
            try {
                out.push_back(std::stod(s));
            } catch (...) {
                throw std::runtime_error("config key '" + key + "': not a number list");
            }
        }
        return out;
    }

  private:
    std::map<std::string, std::string> kv_;
};

/// Full experiment description: dataset sizes, sweep grid, scenarios,
/// decoder set, channel and impairment parameters, training hyperparameters.
struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    int n_train = 35000;
    int n_test = 15000;
    double snr_min_db = 0.0;
    double snr_max_db = 22.0;
    double snr_step_db = 2.0;
    std::vector<std::string> scenarios{"clean", "impaired"};
    std::vector<std::string> decoders{"zf", "lmmse", "ml", "ae-legit", "ae-eve"};
    long long min_bit_errors = 100;
    long long max_symbols = 200000;
    int m_order = 16;
    int workers = 0; // 0 = one per hardware thread
    channel::ChannelConfig ch;
    impair::ImpairmentConfig imp; // chain used by the "impaired" scenario
    autoenc::TrainConfig train;

    std::vector<double> snr_grid() const {
        std::vector<double> grid;
        for (double s = snr_min_db; s <= snr_max_db + 1.0e-9; s += snr_step_db)
            grid.push_back(s);
        return grid;
    }

    autoenc::SystemConfig system(bool impaired) const {
        autoenc::SystemConfig sys;
        sys.m_order = m_order;
        sys.ch = ch;
        sys.imp = imp;
        if (!impaired)
            sys.imp.enabled = {false, false, false, false};
        return sys;
    }
};

inline ExperimentConfig experiment_from_kv(const KeyValueConfig &kv) {
    ExperimentConfig cfg;
    cfg.master_seed = static_cast<std::uint64_t>(kv.get_int("experiment.master_seed", 1));
    cfg.n_train = static_cast<int>(kv.get_int("experiment.n_train", 35000));
    cfg.n_test = static_cast<int>(kv.get_int("experiment.n_test", 15000));
    cfg.snr_min_db = kv.get_double("experiment.snr_min_db", 0.0);
    cfg.snr_max_db = kv.get_double("experiment.snr_max_db", 22.0);
    cfg.snr_step_db = kv.get_double("experiment.snr_step_db", 2.0);
    cfg.scenarios = kv.get_list("experiment.scenarios", {"clean", "impaired"});
    cfg.decoders = kv.get_list("experiment.decoders", {"zf", "lmmse", "ml", "ae-legit", "ae-eve"});
    cfg.min_bit_errors = kv.get_int("sweep.min_bit_errors", 100);
    cfg.max_symbols = kv.get_int("sweep.max_symbols", 200000);
    cfg.m_order = static_cast<int>(kv.get_int("modem.order", 16));
    cfg.workers = static_cast<int>(kv.get_int("sweep.workers", 0));

    cfg.ch.n_rx = static_cast<int>(kv.get_int("channel.n_rx", 6));
    cfg.ch.n_paths = static_cast<int>(kv.get_int("channel.n_paths", 3));
    cfg.ch.spacing_ratio = kv.get_double("channel.spacing_ratio", 0.5);
    const std::string profile = kv.get_string("channel.profile", "geometric");
    if (profile == "geometric")
        cfg.ch.profile = channel::Profile::geometric;
    else if (profile == "iid_rayleigh")
        cfg.ch.profile = channel::Profile::iid_rayleigh;
    else
        throw std::runtime_error("channel.profile: unknown value " + profile);

    // per-device IQ imbalance draws, frozen by the master seed unless the
    // config pins explicit values
    Rng dev(derive_seed(cfg.master_seed, "device-impairments"));
    cfg.imp = impair::default_impairments(dev);
    cfg.imp.sample_rate_hz = kv.get_double("impair.sample_rate_hz", 1.0e6);
    cfg.imp.frame_len = static_cast<int>(kv.get_int("impair.frame_len", 16));
    cfg.imp.enabled.dac = kv.get_bool("impair.enabled.dac", true);
    cfg.imp.enabled.mixer = kv.get_bool("impair.enabled.mixer", true);
    cfg.imp.enabled.vco = kv.get_bool("impair.enabled.vco", true);
    cfg.imp.enabled.pa = kv.get_bool("impair.enabled.pa", true);
    cfg.imp.dac.rho = kv.get_double_list("dac.rho", {1.0, 0.0, -0.05});
    cfg.imp.mixer.gain_imbalance_db =
        kv.get_double("mixer.gain_imbalance_db", cfg.imp.mixer.gain_imbalance_db);
    cfg.imp.mixer.phase_error_deg =
        kv.get_double("mixer.phase_error_deg", cfg.imp.mixer.phase_error_deg);
    cfg.imp.mixer.cfo_hz = kv.get_double("mixer.cfo_hz", 1000.0);
    cfg.imp.mixer.f_ppm = kv.get_double("mixer.f_ppm", 10.0);
    cfg.imp.mixer.f_c0_hz = kv.get_double("mixer.f_c0_hz", 2.0e9);
    cfg.imp.mixer.pn_variance_per_sample = kv.get_double("mixer.pn_variance", 1.0e-4);
    cfg.imp.vco.gain_imbalance_db =
        kv.get_double("vco.gain_imbalance_db", cfg.imp.vco.gain_imbalance_db);
    cfg.imp.vco.phase_error_deg = kv.get_double("vco.phase_error_deg", cfg.imp.vco.phase_error_deg);
    cfg.imp.vco.k_vco = kv.get_double("vco.k_vco", 100.0);
    cfg.imp.vco.v_vco = kv.get_double("vco.v_vco", 0.1);
    cfg.imp.vco.f_vco0_hz = kv.get_double("vco.f_vco0_hz", 2.0e9);
    cfg.imp.vco.pn_variance_per_sample = kv.get_double("vco.pn_variance", 1.0e-4);
    cfg.imp.pa.alpha_a = kv.get_double("pa.alpha_a", 2.1587);
    cfg.imp.pa.beta_a = kv.get_double("pa.beta_a", 1.1517);
    cfg.imp.pa.alpha_p = kv.get_double("pa.alpha_p", 4.0033);
    cfg.imp.pa.beta_p = kv.get_double("pa.beta_p", 9.1040);
    cfg.imp.pa.input_backoff = kv.get_double("pa.input_backoff", 1.0);

    cfg.train.alpha = kv.get_double("train.alpha", 0.5);
    cfg.train.batch_size = static_cast<int>(kv.get_int("train.batch_size", 256));
    cfg.train.epochs = static_cast<int>(kv.get_int("train.epochs", 100));
    cfg.train.lr0 = kv.get_double("train.lr0", 0.0003);
    cfg.train.lr_decay = kv.get_double("train.lr_decay", 0.65);
    cfg.train.lr_patience = static_cast<int>(kv.get_int("train.lr_patience", 3));
    cfg.train.snr_min_db = kv.get_double("train.snr_min_db", 0.0);
    cfg.train.snr_max_db = kv.get_double("train.snr_max_db", 18.0);
    cfg.train.power_limit = kv.get_double("train.power_limit", 1.0);
    cfg.train.seed = derive_seed(cfg.master_seed, "train");
    return cfg;
}

inline KeyValueConfig experiment_to_kv(const ExperimentConfig &cfg) {
    KeyValueConfig kv;
    kv.set("experiment.master_seed", cfg.master_seed);
    kv.set("experiment.n_train", cfg.n_train);
    kv.set("experiment.n_test", cfg.n_test);
    kv.set("experiment.snr_min_db", cfg.snr_min_db);
    kv.set("experiment.snr_max_db", cfg.snr_max_db);
    kv.set("experiment.snr_step_db", cfg.snr_step_db);
    std::string sc, dc;
    for (const auto &s : cfg.scenarios)
        sc += (sc.empty() ? "" : ",") + s;
    for (const auto &d : cfg.decoders)
        dc += (dc.empty() ? "" : ",") + d;
    kv.set("experiment.scenarios", sc);
    kv.set("experiment.decoders", dc);
    kv.set("sweep.min_bit_errors", cfg.min_bit_errors);
    kv.set("sweep.max_symbols", cfg.max_symbols);
    kv.set("sweep.workers", cfg.workers);
    kv.set("modem.order", cfg.m_order);
    kv.set("channel.n_rx", cfg.ch.n_rx);
    kv.set("channel.n_paths", cfg.ch.n_paths);
    kv.set("channel.spacing_ratio", cfg.ch.spacing_ratio);
    kv.set("channel.profile",
           cfg.ch.profile == channel::Profile::geometric ? "geometric" : "iid_rayleigh");
    kv.set("impair.sample_rate_hz", cfg.imp.sample_rate_hz);
    kv.set("impair.frame_len", cfg.imp.frame_len);
    kv.set("impair.enabled.dac", cfg.imp.enabled.dac);
    kv.set("impair.enabled.mixer", cfg.imp.enabled.mixer);
    kv.set("impair.enabled.vco", cfg.imp.enabled.vco);
    kv.set("impair.enabled.pa", cfg.imp.enabled.pa);
    std::string rho;
    for (const double r : cfg.imp.dac.rho)
        rho += (rho.empty() ? "" : ",") + format_double(r);
    kv.set("dac.rho", rho);
    kv.set("mixer.gain_imbalance_db", cfg.imp.mixer.gain_imbalance_db);
    kv.set("mixer.phase_error_deg", cfg.imp.mixer.phase_error_deg);
    kv.set("mixer.cfo_hz", cfg.imp.mixer.cfo_hz);
    kv.set("mixer.f_ppm", cfg.imp.mixer.f_ppm);
    kv.set("mixer.f_c0_hz", cfg.imp.mixer.f_c0_hz);
    kv.set("mixer.pn_variance", cfg.imp.mixer.pn_variance_per_sample);
    kv.set("vco.gain_imbalance_db", cfg.imp.vco.gain_imbalance_db);
    kv.set("vco.phase_error_deg", cfg.imp.vco.phase_error_deg);
    kv.set("vco.k_vco", cfg.imp.vco.k_vco);
    kv.set("vco.v_vco", cfg.imp.vco.v_vco);
    kv.set("vco.f_vco0_hz", cfg.imp.vco.f_vco0_hz);
    kv.set("vco.pn_variance", cfg.imp.vco.pn_variance_per_sample);
    kv.set("pa.alpha_a", cfg.imp.pa.alpha_a);
    kv.set("pa.beta_a", cfg.imp.pa.beta_a);
    kv.set("pa.alpha_p", cfg.imp.pa.alpha_p);
    kv.set("pa.beta_p", cfg.imp.pa.beta_p);
    kv.set("pa.input_backoff", cfg.imp.pa.input_backoff);
    kv.set("train.alpha", cfg.train.alpha);
    kv.set("train.batch_size", cfg.train.batch_size);
    kv.set("train.epochs", cfg.train.epochs);
    kv.set("train.lr0", cfg.train.lr0);
    kv.set("train.lr_decay", cfg.train.lr_decay);
    kv.set("train.lr_patience", cfg.train.lr_patience);
    kv.set("train.snr_min_db", cfg.train.snr_min_db);
    kv.set("train.snr_max_db", cfg.train.snr_max_db);
    kv.set("train.power_limit", cfg.train.power_limit);
    return kv;
}

} // namespace simosec::harness
