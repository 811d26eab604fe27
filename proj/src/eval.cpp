#include "gaitkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "gaitkit/errors.hpp"
#include "gaitkit/pipeline.hpp"
#include "gaitkit/rng.hpp"
#include "gaitkit/synth.hpp"

namespace gaitkit {

namespace {

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// Positive scores are accepts; F-measure of the one-class decision.
double f_measure(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
    std::size_t tp = 0, fn = 0, fp = 0;
    for (double s : pos_scores) (s >= 0.0 ? tp : fn)++;
    for (double s : neg_scores) {
        if (s >= 0.0) ++fp;
    }
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) seeds[static_cast<std::size_t>(i)] = base + static_cast<std::uint64_t>(i);
    return seeds;
}

// One-class evaluation corpus: a CNN cohort plus one target and a pool of
// impostors the CNN never saw.
struct OneClassCorpus {
    CnnModel cnn;
    std::vector<std::vector<double>> target_enroll_f;
    std::vector<std::vector<double>> target_test_f;
    std::vector<std::vector<double>> impostor_f;
};

OneClassCorpus build_one_class_corpus(const PipelineConfig& cfg, int k_cnn, int n_impostors,
                                      int sessions, double session_s) {
    const auto cnn_cycles =
        synth_cycle_dataset(cfg, seed_range(cfg.seed * 1000 + 1, k_cnn), sessions, session_s, true);
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const TrainResult tr = train(cnn_cycles, cfg.arch, tc);

    OneClassCorpus corpus;
    corpus.cnn = tr.model;

    const auto target_cycles = synth_cycle_dataset(cfg, {cfg.seed * 1000 + 500}, sessions + 2,
                                                   session_s, true);
    auto target_f = extract_feature_set(target_cycles, corpus.cnn);
    const std::size_t enroll = target_f.size() * 2 / 3;
    corpus.target_enroll_f.assign(target_f.begin(),
                                  target_f.begin() + static_cast<std::ptrdiff_t>(enroll));
    corpus.target_test_f.assign(target_f.begin() + static_cast<std::ptrdiff_t>(enroll),
                                target_f.end());

    const auto impostor_cycles = synth_cycle_dataset(
        cfg, seed_range(cfg.seed * 1000 + 600, n_impostors), 1, session_s, true);
    corpus.impostor_f = extract_feature_set(impostor_cycles, corpus.cnn);
    return corpus;
}

struct OneClassScores {
    std::vector<double> pos;
    std::vector<double> neg;
};

OneClassScores score_one_class(const OneClassCorpus& corpus, double nu, double gamma, int s_count,
                               PcaMode mode, std::size_t enroll_cap) {
    std::vector<std::vector<double>> enroll_f = corpus.target_enroll_f;
    if (enroll_f.size() > enroll_cap) enroll_f.resize(enroll_cap);

    const PcaTransform pca = fit_pca(enroll_f, s_count, mode);
    std::vector<std::vector<double>> train_s;
    train_s.reserve(enroll_f.size());
    for (const auto& f : enroll_f) train_s.push_back(pca_apply(pca, f));

    OsvmModel model = train_osvm(train_s, nu, gamma);
    model.pca = pca;

    OneClassScores out;
    for (const auto& f : corpus.target_test_f) out.pos.push_back(score_feature(model, f));
    for (const auto& f : corpus.impostor_f) out.neg.push_back(score_feature(model, f));
    return out;
}

} // namespace

void write_csv(std::ostream& out, const CsvTable& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << table.columns[i] << (i + 1 == table.columns.size() ? "\n" : ",");
    }
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << g9(row[i]) << (i + 1 == row.size() ? "\n" : ",");
        }
    }
}

void save_csv(const std::string& path, const CsvTable& table) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("csv: cannot write " + path);
    write_csv(f, table);
}

std::vector<CycleMatrix> synth_cycle_dataset(const PipelineConfig& cfg,
                                             const std::vector<std::uint64_t>& subject_seeds,
                                             int sessions, double session_s,
                                             bool random_rotations) {
    std::vector<CycleMatrix> dataset;
    for (std::size_t subject = 0; subject < subject_seeds.size(); ++subject) {
        const SubjectProfile profile = generate_subject(subject_seeds[subject]);
        for (int session = 0; session < sessions; ++session) {
            Mat3 rotation = Mat3::identity();
            if (random_rotations) {
                Rng rot_rng = Rng(subject_seeds[subject]).fork(0x707 + static_cast<std::uint64_t>(session));
                rotation = random_rotation(rot_rng);
            }
            const SynthWalk walk = generate_walk(profile, session_s, rotation, 0.2,
                                                 static_cast<std::uint64_t>(session));
            PreprocessOutcome pre = preprocess_recording(walk.recording, cfg);
            for (auto& c : pre.cycles) {
                c.subject_label = static_cast<int>(subject);
                dataset.push_back(std::move(c));
            }
        }
    }
    return dataset;
}

CsvTable eval_nc_sweep(const PipelineConfig& cfg, const std::vector<int>& nc_values) {
    const auto dataset =
        synth_cycle_dataset(cfg, seed_range(cfg.seed * 1000 + 1, 4), 3, 60.0, true);
    CsvTable table;
    table.columns = {"train_cycles_per_subject", "test_accuracy"};
    for (int nc : nc_values) {
        TrainConfig tc = cfg.train;
        tc.train_per_class = nc;
        tc.seed = cfg.seed;
        const TrainResult r = train(dataset, cfg.arch, tc);
        table.rows.push_back({static_cast<double>(nc), r.test_accuracy});
    }
    return table;
}

CsvTable eval_f_sweep(const PipelineConfig& cfg, const std::vector<int>& f_values) {
    const auto dataset =
        synth_cycle_dataset(cfg, seed_range(cfg.seed * 1000 + 1, 4), 3, 60.0, true);
    CsvTable table;
    table.columns = {"features", "test_accuracy"};
    for (int f : f_values) {
        CnnArchitecture arch = cfg.arch;
        arch.features = f;
        TrainConfig tc = cfg.train;
        tc.seed = cfg.seed;
        const TrainResult r = train(dataset, arch, tc);
        table.rows.push_back({static_cast<double>(f), r.test_accuracy});
    }
    return table;
}

CsvTable eval_gyro_ablation(const PipelineConfig& cfg) {
    CsvTable table;
    table.columns = {"use_gyro", "test_accuracy"};
    for (int use_gyro = 1; use_gyro >= 0; --use_gyro) {
        PipelineConfig local = cfg;
        local.use_gyro = use_gyro == 1;
        CnnArchitecture arch = cfg.arch;
        arch.input_rows = local.use_gyro ? 8 : 4;
        const auto dataset =
            synth_cycle_dataset(local, seed_range(cfg.seed * 1000 + 1, 4), 3, 60.0, true);
        TrainConfig tc = cfg.train;
        tc.seed = cfg.seed;
        const TrainResult r = train(dataset, arch, tc);
        table.rows.push_back({static_cast<double>(use_gyro), r.test_accuracy});
    }
    return table;
}

CsvTable eval_nu_gamma_grid(const PipelineConfig& cfg, const std::vector<double>& gammas,
                            const std::vector<double>& nus) {
    const OneClassCorpus corpus = build_one_class_corpus(cfg, 4, 4, 3, 60.0);
    CsvTable table;
    table.columns = {"gamma", "nu", "f_measure"};
    for (double gamma : gammas) {
        for (double nu : nus) {
            const OneClassScores s = score_one_class(corpus, nu, gamma, cfg.pca_s, cfg.pca_mode,
                                                     static_cast<std::size_t>(cfg.enroll_max_cycles));
            table.rows.push_back({gamma, nu, f_measure(s.pos, s.neg)});
        }
    }
    return table;
}

CsvTable eval_s_sweep(const PipelineConfig& cfg, const std::vector<int>& s_values) {
    const OneClassCorpus corpus = build_one_class_corpus(cfg, 4, 4, 3, 60.0);
    CsvTable table;
    table.columns = {"s_components", "f_measure_lowest", "f_measure_highest"};
    for (int s : s_values) {
        const OneClassScores lo = score_one_class(corpus, cfg.osvm_nu, cfg.osvm_gamma, s,
                                                  PcaMode::lowest,
                                                  static_cast<std::size_t>(cfg.enroll_max_cycles));
        const OneClassScores hi = score_one_class(corpus, cfg.osvm_nu, cfg.osvm_gamma, s,
                                                  PcaMode::highest,
                                                  static_cast<std::size_t>(cfg.enroll_max_cycles));
        table.rows.push_back({static_cast<double>(s), f_measure(lo.pos, lo.neg),
                              f_measure(hi.pos, hi.neg)});
    }
    return table;
}

CsvTable eval_enroll_sweep(const PipelineConfig& cfg, const std::vector<int>& cycle_counts) {
    const OneClassCorpus corpus = build_one_class_corpus(cfg, 4, 4, 4, 60.0);
    CsvTable table;
    table.columns = {"enroll_cycles", "f_measure"};
    for (int count : cycle_counts) {
        const OneClassScores s = score_one_class(corpus, cfg.osvm_nu, cfg.osvm_gamma, cfg.pca_s,
                                                 cfg.pca_mode, static_cast<std::size_t>(count));
        table.rows.push_back({static_cast<double>(count), f_measure(s.pos, s.neg)});
    }
    return table;
}

CsvTable eval_sprt_curves(const PipelineConfig& cfg, const std::vector<double>& error_rates) {
    const OneClassCorpus corpus = build_one_class_corpus(cfg, 4, 4, 3, 60.0);
    const OneClassScores s = score_one_class(corpus, cfg.osvm_nu, cfg.osvm_gamma, cfg.pca_s,
                                             cfg.pca_mode,
                                             static_cast<std::size_t>(cfg.enroll_max_cycles));
    const auto [p1, p0] = fit_score_models(s.pos, s.neg, ScoreFamily::gaussian);

    CsvTable table;
    table.columns = {"alpha_beta", "false_positive_rate", "false_negative_rate",
                     "median_cycles"};
    Rng rng(cfg.seed ^ 0x5b97);
    constexpr int kTrials = 2000;
    for (double err : error_rates) {
        const SprtConfig sc = make_sprt_config(err, err, cfg.sprt_max_cycles);
        int fp = 0, fn = 0;
        std::vector<int> cycles_used;
        for (int trial = 0; trial < kTrials; ++trial) {
            for (int cls = 0; cls < 2; ++cls) {
                const ScoreModel& gen = cls == 1 ? p1 : p0;
                SprtState state;
                while (state.decision == SprtDecision::pending) {
                    state = sprt_step(state, rng.normal(gen.mu, gen.sigma), p0, p1, sc);
                }
                if (cls == 1) {
                    cycles_used.push_back(state.n);
                    if (state.decision == SprtDecision::accept_h0) ++fn;
                } else if (state.decision == SprtDecision::accept_h1) {
                    ++fp;
                }
            }
        }
        std::sort(cycles_used.begin(), cycles_used.end());
        table.rows.push_back({err, static_cast<double>(fp) / kTrials,
                              static_cast<double>(fn) / kTrials,
                              static_cast<double>(cycles_used[cycles_used.size() / 2])});
    }
    return table;
}

CsvTable run_eval_protocol(const std::string& name, const PipelineConfig& cfg) {
    if (name == "nc-sweep") return eval_nc_sweep(cfg, {5, 10, 20, 40});
    if (name == "f-sweep") return eval_f_sweep(cfg, {10, 20, 40});
    if (name == "gyro-ablation") return eval_gyro_ablation(cfg);
    if (name == "nu-gamma-grid") {
        return eval_nu_gamma_grid(cfg, {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0},
                                  {0.01, 0.02, 0.05, 0.1, 0.15, 0.2});
    }
    if (name == "s-sweep") return eval_s_sweep(cfg, {5, 10, 20, 30, 40});
    if (name == "enroll-sweep") return eval_enroll_sweep(cfg, {50, 100, 200, 400});
    if (name == "sprt-curves") return eval_sprt_curves(cfg, {0.001, 0.01, 0.05, 0.1});
    throw ParameterError("eval: unknown protocol '" + name + "'");
}

std::vector<std::string> eval_protocol_names() {
    return {"nc-sweep",      "f-sweep",     "gyro-ablation", "nu-gamma-grid",
            "s-sweep",       "enroll-sweep", "sprt-curves"};
}

} // namespace gaitkit
