// gaitkit - gait-based user authentication from smartphone inertial data.
//
// Verbs: synth, preprocess, train-cnn, enroll, authenticate, eval.
// Exit codes: 0 success, 2 validation/format error, 3 insufficient data,
// 4 non-convergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gaitkit/errors.hpp"
#include "gaitkit/eval.hpp"
#include "gaitkit/pipeline.hpp"
#include "gaitkit/rng.hpp"
#include "gaitkit/store.hpp"
#include "gaitkit/synth.hpp"

namespace fs = std::filesystem;
using namespace gaitkit;

namespace {

struct SharedOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool force = false;
    bool no_gyro = false;
};

void add_shared(CLI::App* cmd, SharedOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--seed", opts.seed, "seed overriding the config")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_flag("--force", opts.force, "overwrite existing output files");
    cmd->add_flag("--no-gyro", opts.no_gyro, "accelerometer-only pipeline (4-row inputs)");
}

PipelineConfig resolve_config(const SharedOpts& opts) {
    PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path, cfg);
    if (opts.seed_set) {
        cfg.seed = opts.seed;
        cfg.train.seed = opts.seed;
    }
    if (opts.no_gyro) cfg.use_gyro = false;
    cfg.arch.input_rows = cfg.use_gyro ? 8 : 4;
    cfg.arch.input_cols = cfg.n_samples;
    return cfg;
}

void require_writable(const std::string& path, bool force) {
    if (fs::exists(path) && !force) {
        throw ValidationError("output exists, pass --force to overwrite: " + path);
    }
}

int cmd_synth(const std::vector<std::uint64_t>& seeds, double duration, int sessions,
              bool rotate, const std::string& out_dir, const SharedOpts& opts) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
        throw ValidationError("synth: cannot create output directory " + out_dir + ": " +
                              ec.message());
    }
    for (std::uint64_t seed : seeds) {
        const SubjectProfile profile = generate_subject(seed);
        for (int session = 0; session < sessions; ++session) {
            Mat3 rotation = Mat3::identity();
            if (rotate) {
                Rng rot_rng = Rng(seed).fork(0x707 + static_cast<std::uint64_t>(session));
                rotation = random_rotation(rot_rng);
            }
            const SynthWalk walk =
                generate_walk(profile, duration, rotation, 0.2, static_cast<std::uint64_t>(session));
            const std::string path =
                (fs::path(out_dir) / (walk.recording.subject_id + "_" +
                                      walk.recording.session_id + ".rec")).string();
            require_writable(path, opts.force);
            save_recording(path, walk.recording);
            std::cout << path << ": " << walk.recording.accel.size() << " accel + "
                      << walk.recording.gyro.size() << " gyro samples, "
                      << walk.truth.cycle_start_times.size() << " cycles\n";
        }
    }
    return 0;
}

int cmd_preprocess(const std::vector<std::string>& rec_paths, const std::string& out_path,
                   const std::string& phi_dir, const SharedOpts& opts) {
    const PipelineConfig cfg = resolve_config(opts);
    require_writable(out_path, opts.force);

    struct PerRecording {
        std::string subject;
        std::vector<CycleMatrix> cycles;
        SegmentationStats stats;
        std::size_t degenerate = 0;
        std::string error;
    };
    std::vector<PerRecording> results(rec_paths.size());

    for (std::size_t i = 0; i < rec_paths.size(); ++i) {
        auto& slot = results[i];
        try {
            const Recording rec = load_recording(rec_paths[i]);
            slot.subject = rec.subject_id;
            if (!phi_dir.empty()) {
                AlignedSignals sig = resample_aligned(rec, cfg.rate_hz);
                sig.accel = lowpass_fir(sig.accel, cfg.fir_cutoff_hz, cfg.fir_taps);
                sig.gyro = lowpass_fir(sig.gyro, cfg.fir_cutoff_hz, cfg.fir_taps);
                SegmentationDiagnostics diag;
                SegmentationStats stats;
                try {
                    segment_cycles(sig.accel, sig.gyro, cfg.phi_th, cfg.cycle_cutoff_hz, &stats,
                                   &diag);
                } catch (const Error&) {
                }
                fs::create_directories(phi_dir);
                const std::string phi_path =
                    (fs::path(phi_dir) /
                     (fs::path(rec_paths[i]).stem().string() + "_phi.csv")).string();
                std::ofstream pf(phi_path, std::ios::binary);
                pf << "index,phi,is_minimum\n";
                std::set<std::size_t> minima(diag.minima.begin(), diag.minima.end());
                for (std::size_t k = 0; k < diag.phi.size(); ++k) {
                    pf << k << "," << diag.phi[k] << "," << (minima.count(k) ? 1 : 0) << "\n";
                }
            }
            PreprocessOutcome out = preprocess_recording(rec, cfg);
            slot.cycles = std::move(out.cycles);
            slot.stats = out.seg_stats;
            slot.degenerate = out.dropped_degenerate;
        } catch (const Error& e) {
            slot.error = e.what();
        }
    }

    // Labels follow the sorted unique subject ids.
    std::set<std::string> subjects;
    for (const auto& r : results) {
        if (r.error.empty()) subjects.insert(r.subject);
    }
    std::map<std::string, int> label_of;
    for (const auto& s : subjects) {
        const int label = static_cast<int>(label_of.size());
        label_of[s] = label;
        std::cout << "label " << label << " = subject " << s << "\n";
    }

    std::vector<CycleMatrix> dataset;
    for (std::size_t i = 0; i < rec_paths.size(); ++i) {
        auto& r = results[i];
        if (!r.error.empty()) {
            std::cout << rec_paths[i] << ": dropped (" << r.error << ")\n";
            continue;
        }
        std::cout << rec_paths[i] << ": cycles=" << r.cycles.size()
                  << " dropped_short=" << r.stats.dropped_short
                  << " dropped_long=" << r.stats.dropped_long << " degenerate=" << r.degenerate
                  << "\n";
        for (auto& c : r.cycles) {
            c.subject_label = label_of[r.subject];
            dataset.push_back(std::move(c));
        }
    }
    if (dataset.empty()) {
        throw InsufficientDataError("preprocess: no cycles extracted from any recording");
    }
    save_cycle_dataset(out_path, dataset);
    std::cout << out_path << ": " << dataset.size() << " cycles, " << subjects.size()
              << " subjects\n";
    return 0;
}

int cmd_train_cnn(const std::string& dataset_path, const std::string& out_path,
                  const SharedOpts& opts) {
    PipelineConfig cfg = resolve_config(opts);
    require_writable(out_path, opts.force);
    const auto dataset = load_cycle_dataset(dataset_path);

    cfg.arch.input_rows = dataset.front().n_rows();
    cfg.arch.input_cols = dataset.front().n_cols;
    const TrainResult result = train(dataset, cfg.arch, cfg.train);
    save_cnn_model(out_path, result.model);

    std::cout << "epochs=" << result.model.meta.epochs_run
              << " best_val_loss=" << result.model.meta.best_val_loss
              << " test_accuracy=" << result.test_accuracy << "\n";
    std::cout << "confusion (rows=true class, cols=predicted):\n";
    for (const auto& row : result.confusion) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::cout << row[j] << (j + 1 == row.size() ? "\n" : " ");
        }
    }
    std::cout << out_path << ": saved\n";
    return 0;
}

int cmd_enroll(const std::string& target_path, const std::string& bank_path,
               const std::string& cnn_path, const std::string& out_path, const SharedOpts& opts) {
    const PipelineConfig cfg = resolve_config(opts);
    require_writable(out_path, opts.force);
    const auto target = load_cycle_dataset(target_path);
    const auto bank = load_cycle_dataset(bank_path);
    const CnnModel cnn = load_cnn_model(cnn_path);

    const AuthProfile profile = enroll_target(target, bank, cnn, cfg);
    save_auth_profile(out_path, profile);
    std::cout << "enrolled with " << target.size() << " target cycles, "
              << profile.osvm.support_vectors.size() << " support vectors, p1=N("
              << profile.p1.mu << "," << profile.p1.sigma << ") p0=N(" << profile.p0.mu << ","
              << profile.p0.sigma << ")\n";
    std::cout << out_path << ": saved\n";
    return 0;
}

int cmd_authenticate(const std::string& profile_path, const std::string& rec_path,
                     const SharedOpts& opts) {
    const PipelineConfig cfg = resolve_config(opts);
    const AuthProfile profile = load_auth_profile(profile_path);
    const Recording rec = load_recording(rec_path);

    const AuthReport report = authenticate_recording(rec, profile, cfg);
    std::cout << "decision="
              << (report.decision == SprtDecision::accept_h1 ? "accept" : "reject")
              << " cycles_used=" << report.n_used << " cycles_available=" << report.scores.size()
              << "\n";
    std::cout << "lambda_trace=";
    for (std::size_t i = 0; i < report.trace.size(); ++i) {
        std::cout << report.trace[i] << (i + 1 == report.trace.size() ? "\n" : ",");
    }
    return 0;
}

int cmd_eval(const std::string& protocol, const std::string& out_dir, const SharedOpts& opts) {
    const PipelineConfig cfg = resolve_config(opts);
    const CsvTable table = run_eval_protocol(protocol, cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const std::string path = (fs::path(out_dir) / (protocol + ".csv")).string();
    require_writable(path, opts.force);
    save_csv(path, table);
    write_csv(std::cout, table);
    std::cout << path << ": saved\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gait-based user authentication toolkit"};
    app.require_subcommand(1);

    SharedOpts shared;

    // synth
    auto* synth = app.add_subcommand("synth", "generate deterministic synthetic recordings");
    std::vector<std::uint64_t> seeds{1};
    double duration = 60.0;
    int sessions = 1;
    bool rotate = false;
    std::string out_dir = ".";
    synth->add_option("--seeds", seeds, "subject seeds")->delimiter(',');
    synth->add_option("--duration", duration, "walk duration in seconds");
    synth->add_option("--sessions", sessions, "sessions per subject");
    synth->add_flag("--rotate", rotate, "apply a random device rotation per session");
    synth->add_option("--out", out_dir, "output directory")->required();
    add_shared(synth, shared);

    // preprocess
    auto* preprocess = app.add_subcommand("preprocess", "recordings -> cycle dataset");
    std::vector<std::string> rec_paths;
    std::string cyc_out, phi_dir;
    preprocess->add_option("recordings", rec_paths, "recording files")->required();
    preprocess->add_option("--out", cyc_out, "output dataset path")->required();
    preprocess->add_option("--dump-phi", phi_dir, "write match-metric diagnostics CSVs here");
    add_shared(preprocess, shared);

    // train-cnn
    auto* train_cnn = app.add_subcommand("train-cnn", "train the feature network");
    std::string dataset_path, cnn_out;
    train_cnn->add_option("--dataset", dataset_path, "cycle dataset")->required();
    train_cnn->add_option("--out", cnn_out, "output model path")->required();
    add_shared(train_cnn, shared);

    // enroll
    auto* enroll = app.add_subcommand("enroll", "build an authentication profile");
    std::string target_path, bank_path, cnn_path, profile_out;
    enroll->add_option("--target", target_path, "target cycle dataset")->required();
    enroll->add_option("--bank", bank_path, "impostor score-bank cycle dataset")->required();
    enroll->add_option("--cnn", cnn_path, "trained feature network")->required();
    enroll->add_option("--out", profile_out, "output profile path")->required();
    add_shared(enroll, shared);

    // authenticate
    auto* auth = app.add_subcommand("authenticate", "decide a recording against a profile");
    std::string profile_path, walk_path;
    auth->add_option("--profile", profile_path, "authentication profile")->required();
    auth->add_option("--recording", walk_path, "recording to authenticate")->required();
    add_shared(auth, shared);

    // eval
    auto* eval = app.add_subcommand("eval", "run a replication protocol, write CSV");
    std::string protocol, eval_out = ".";
    eval->add_option("--protocol", protocol, "one of: " + [] {
                        std::string s;
                        for (const auto& n : eval_protocol_names()) s += n + " ";
                        return s;
                    }())
        ->required();
    eval->add_option("--out", eval_out, "output directory");
    add_shared(eval, shared);

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(seeds, duration, sessions, rotate, out_dir, shared);
        if (preprocess->parsed()) return cmd_preprocess(rec_paths, cyc_out, phi_dir, shared);
        if (train_cnn->parsed()) return cmd_train_cnn(dataset_path, cnn_out, shared);
        if (enroll->parsed()) {
            return cmd_enroll(target_path, bank_path, cnn_path, profile_out, shared);
        }
        if (auth->parsed()) return cmd_authenticate(profile_path, walk_path, shared);
        if (eval->parsed()) return cmd_eval(protocol, eval_out, shared);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
