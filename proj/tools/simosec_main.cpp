// Command-line front end: dataset generation, autoencoder training, BER
// sweeps, constellation dumps and SVG plotting over the simulation library.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "simosec/simosec.hpp"

using namespace simosec;

namespace {

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
};

void add_common(CLI::App *cmd, CommonArgs &args) {
    cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
    cmd->add_option("--seed", args.seed, "master seed override")->each([&](const std::string &) {
        args.seed_set = true;
    });
    cmd->add_option("--out", args.out_dir, "output directory");
}

harness::ExperimentConfig load_experiment(const CommonArgs &args) {
    harness::KeyValueConfig kv;
    if (!args.config_path.empty())
        kv = harness::KeyValueConfig::parse_file(args.config_path);
    if (args.seed_set)
        kv.set("experiment.master_seed", args.seed);
    return harness::experiment_from_kv(kv);
}

std::string resolve_out_dir(const CommonArgs &args) {
    // environment override for the output directory only
    const char *env = std::getenv("SIMOSEC_OUTPUT_DIR");
    const std::string dir = env != nullptr && *env != '\0' ? env : args.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open for writing: " + path);
    os << text;
    if (!os)
        throw std::runtime_error("write failed: " + path);
}

void write_history_csv(const std::string &path, const autoenc::History &history) {
    std::ostringstream os;
    os << "epoch,lr,loss_total,loss_r,loss_e,val_ber_legit,val_ber_eve\n";
    for (const autoenc::EpochStats &st : history)
        os << st.epoch << ',' << harness::format_double(st.lr) << ','
           << harness::format_double(st.loss_total) << ',' << harness::format_double(st.loss_r)
           << ',' << harness::format_double(st.loss_e) << ','
           << harness::format_double(st.val_ber_legit) << ','
           << harness::format_double(st.val_ber_eve) << "\n";
    write_text_file(path, os.str());
}

std::vector<harness::BerRecord> model_ber_curve(const autoenc::Model &model,
                                                autoenc::Receiver which,
                                                const autoenc::SystemConfig &sys,
                                                const harness::ExperimentConfig &cfg,
                                                const std::string &scenario,
                                                const std::string &decoder_tag) {
    std::vector<harness::BerRecord> records;
    for (const double snr : cfg.snr_grid()) {
        Rng rng(derive_seed(cfg.master_seed,
                            "curve/" + scenario + "/" + decoder_tag + "/" + harness::format_double(snr)));
        const autoenc::BerCount count = autoenc::evaluate_ber(model, which, sys, snr, cfg.n_test, rng);
        harness::BerRecord r;
        r.scenario = scenario;
        r.decoder = decoder_tag;
        r.snr_db = snr;
        r.bit_errors = count.bit_errors;
        r.bits_total = count.bits;
        r.symbol_errors = count.symbol_errors;
        r.symbols_total = count.symbols;
        r.ber = count.ber();
        r.ser = count.ser();
        std::tie(r.ci_low, r.ci_high) = harness::wilson_interval(count.bit_errors, count.bits);
        records.push_back(r);
    }
    return records;
}

int cmd_gen_data(const CommonArgs &args) {
    const harness::ExperimentConfig cfg = load_experiment(args);
    const std::string out = resolve_out_dir(args);
    Rng rng(derive_seed(cfg.master_seed, "dataset"));
    const auto [train, test] = harness::generate_dataset(cfg, rng);
    harness::write_messages_file(out + "/train_messages.csv", train);
    harness::write_messages_file(out + "/test_messages.csv", test);
    write_text_file(out + "/experiment.cfg", harness::experiment_to_kv(cfg).serialize());
    std::cout << "wrote " << train.size() << " training and " << test.size()
              << " test messages to " << out << "\n";
    return 0;
}

int cmd_train(const CommonArgs &args, const std::string &scenario, bool best_response) {
    if (scenario != "clean" && scenario != "impaired")
        throw std::runtime_error("train: scenario must be clean or impaired");
    const harness::ExperimentConfig cfg = load_experiment(args);
    const std::string out = resolve_out_dir(args);
    const autoenc::SystemConfig sys = cfg.system(scenario == "impaired");

    Rng rng(derive_seed(cfg.master_seed, "dataset"));
    const auto [train_msgs, test_msgs] = harness::generate_dataset(cfg, rng);

    std::cout << "training " << scenario << " model: " << cfg.train.epochs << " epochs, alpha "
              << cfg.train.alpha << "\n";
    const auto [model, history] = autoenc::train(train_msgs, cfg.train, sys);
    const std::string model_path = out + "/model_" + scenario + ".bin";
    autoenc::save_model(model_path, model);
    write_history_csv(out + "/training_history_" + scenario + ".csv", history);
    std::cout << "final val BER (legit " << history.back().val_ber_legit << ", eve "
              << history.back().val_ber_eve << ") at " << cfg.train.snr_max_db
              << " dB; checkpoint " << model_path << "\n";

    if (best_response) {
        std::cout << "training best-response eavesdropper\n";
        const auto [br_model, br_history] =
            autoenc::eve_best_response(model, cfg.train, sys, cfg.n_train);
        auto records = model_ber_curve(br_model, autoenc::Receiver::eve, sys, cfg, scenario,
                                       "ae-eve-best-response");
        const auto legit = model_ber_curve(model, autoenc::Receiver::legit, sys, cfg, scenario,
                                           "ae-legit");
        records.insert(records.end(), legit.begin(), legit.end());
        std::sort(records.begin(), records.end(),
                  [](const harness::BerRecord &a, const harness::BerRecord &b) {
                      return std::tie(a.scenario, a.decoder, a.snr_db) <
                             std::tie(b.scenario, b.decoder, b.snr_db);
                  });
        harness::write_ber_csv_file(out + "/eve_best_response_" + scenario + ".csv", records);
        std::cout << "best-response curve written\n";
    }
    return 0;
}

int cmd_sweep(const CommonArgs &args, const std::string &model_path,
              const std::string &model_impaired_path, const std::string &test_data_path) {
    const harness::ExperimentConfig cfg = load_experiment(args);
    const std::string out = resolve_out_dir(args);

    std::optional<autoenc::Model> model_clean, model_impaired;
    if (!model_path.empty())
        model_clean = autoenc::load_model(model_path);
    if (!model_impaired_path.empty())
        model_impaired = autoenc::load_model(model_impaired_path);
    else if (model_clean)
        model_impaired = model_clean; // single checkpoint backs both scenarios

    std::vector<int> test_msgs;
    if (!test_data_path.empty()) {
        test_msgs = harness::read_messages_file(test_data_path);
    } else {
        Rng rng(derive_seed(cfg.master_seed, "dataset"));
        test_msgs = harness::generate_dataset(cfg, rng).second;
    }

    const auto records = harness::run_ber_sweep(cfg, test_msgs,
                                                model_clean ? &*model_clean : nullptr,
                                                model_impaired ? &*model_impaired : nullptr);
    const std::string csv_path = out + "/ber_results.csv";
    harness::write_ber_csv_file(csv_path, records);
    std::cout << "wrote " << records.size() << " records to " << csv_path << "\n";
    return 0;
}

int cmd_constellations(const CommonArgs &args, int n) {
    const harness::ExperimentConfig cfg = load_experiment(args);
    const std::string out = resolve_out_dir(args);
    const auto taps = harness::dump_constellations(cfg.imp, n, cfg.m_order,
                                                   derive_seed(cfg.master_seed, "constellations"),
                                                   out);
    std::cout << "wrote " << n << " samples per stage to " << out << "\n";
    if (cfg.imp.enabled.mixer)
        std::cout << "post-mixer IQ phase estimate: "
                  << harness::estimate_iq_phase_error_rad(taps[2]) * 180.0 / std::numbers::pi
                  << " deg (configured " << cfg.imp.mixer.phase_error_deg << " deg)\n";
    if (cfg.imp.enabled.pa) {
        const auto [inner, outer] = harness::modulus_ratio_by_radius(taps[4], taps[0]);
        std::cout << "PA modulus ratio inner " << inner << ", outer " << outer << "\n";
    }
    return 0;
}

int cmd_plot(const CommonArgs &args, const std::string &records_path) {
    const std::string out = resolve_out_dir(args);
    const std::string in = records_path.empty() ? out + "/ber_results.csv" : records_path;
    const auto records = harness::read_ber_csv_file(in);
    const auto paths = harness::emit_plots(records, out);
    for (const std::string &p : paths)
        std::cout << "wrote " << p << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"secure SIMO link simulator: impairment chain, classical decoders, "
                 "trainable transceiver"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, sweep_args, dump_args, plot_args;

    CLI::App *gen = app.add_subcommand("gen-data", "generate and persist the message datasets");
    add_common(gen, gen_args);

    CLI::App *train = app.add_subcommand("train", "train the autoencoder transceiver");
    add_common(train, train_args);
    std::string scenario = "clean";
    bool best_response = false;
    train->add_option("--scenario", scenario, "clean or impaired");
    train->add_flag("--eve-best-response", best_response,
                    "also train a best-response eavesdropper and emit its BER curve");

    CLI::App *sweep = app.add_subcommand("sweep", "run the Monte Carlo BER sweep");
    add_common(sweep, sweep_args);
    std::string model_path, model_impaired_path, test_data_path;
    sweep->add_option("--model", model_path, "model checkpoint for AE decoders");
    sweep->add_option("--model-impaired", model_impaired_path,
                      "separate checkpoint for the impaired scenario");
    sweep->add_option("--test-data", test_data_path, "test message file from gen-data");

    CLI::App *dump = app.add_subcommand("constellations", "dump per-stage constellation scatters");
    add_common(dump, dump_args);
    int n_samples = 100000;
    dump->add_option("--n", n_samples, "samples per stage");

    CLI::App *plot = app.add_subcommand("plot", "render BER sweep results as SVG charts");
    add_common(plot, plot_args);
    std::string records_path;
    plot->add_option("--in", records_path, "BER results csv (default <out>/ber_results.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_args);
        if (train->parsed())
            return cmd_train(train_args, scenario, best_response);
        if (sweep->parsed())
            return cmd_sweep(sweep_args, model_path, model_impaired_path, test_data_path);
        if (dump->parsed())
            return cmd_constellations(dump_args, n_samples);
        if (plot->parsed())
            return cmd_plot(plot_args, records_path);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
