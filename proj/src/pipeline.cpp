#include "gaitkit/pipeline.hpp"

#include <algorithm>

#include "gaitkit/errors.hpp"
#include "gaitkit/orientation.hpp"
#include "gaitkit/rng.hpp"
#include "gaitkit/signal.hpp"

namespace gaitkit {

PreprocessOutcome preprocess_recording(const Recording& rec, const PipelineConfig& cfg) {
    PreprocessOutcome out;
    out.subject_id = rec.subject_id;
    out.session_id = rec.session_id;

    AlignedSignals sig = resample_aligned(rec, cfg.rate_hz);
    sig.accel = lowpass_fir(sig.accel, cfg.fir_cutoff_hz, cfg.fir_taps);
    sig.gyro = lowpass_fir(sig.gyro, cfg.fir_cutoff_hz, cfg.fir_taps);

    const auto cycles =
        segment_cycles(sig.accel, sig.gyro, cfg.phi_th, cfg.cycle_cutoff_hz, &out.seg_stats);

    for (const auto& cycle : cycles) {
        try {
            const OrientedCycle oc = transform_cycle(cycle);
            CycleMatrix x = assemble_input(oc, cfg.use_gyro, cfg.n_samples);
            x.session_id = rec.session_id;
            out.cycles.push_back(std::move(x));
        } catch (const DegenerateError&) {
            ++out.dropped_degenerate;
        }
    }
    return out;
}

std::vector<std::vector<double>> extract_feature_set(const std::vector<CycleMatrix>& cycles,
                                                     const CnnModel& model) {
    std::vector<std::vector<double>> features;
    features.reserve(cycles.size());
    CnnWorkspace ws;
    for (const auto& x : cycles) {
        forward_ws(x, model, ws);
        features.push_back(ws.features);
    }
    return features;
}

double score_feature(const OsvmModel& model, const std::vector<double>& f) {
    return osvm_score(model, pca_apply(model.pca, f));
}

AuthProfile enroll_target(const std::vector<CycleMatrix>& target_cycles,
                          const std::vector<CycleMatrix>& bank_cycles, const CnnModel& cnn,
                          const PipelineConfig& cfg) {
    if (target_cycles.size() < 10) {
        throw InsufficientDataError("enroll: need at least 10 target cycles, got " +
                                    std::to_string(target_cycles.size()));
    }

    // Deterministic split: an OSVM training slice (capped) and a held-out
    // slice for the target score density. Small enrollments fall back to
    // fitting p1 on the training scores.
    std::vector<std::size_t> order(target_cycles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed ^ 0x5eedbeef);
    rng.shuffle(order);

    std::size_t holdout = 0;
    if (target_cycles.size() >= 60) {
        holdout = std::max<std::size_t>(30, target_cycles.size() / 5);
    }
    std::size_t train_count = target_cycles.size() - holdout;
    train_count = std::min(train_count, static_cast<std::size_t>(cfg.enroll_max_cycles));

    std::vector<CycleMatrix> train_cycles, holdout_cycles;
    for (std::size_t i = 0; i < train_count; ++i) train_cycles.push_back(target_cycles[order[i]]);
    for (std::size_t i = target_cycles.size() - holdout; i < target_cycles.size(); ++i) {
        holdout_cycles.push_back(target_cycles[order[i]]);
    }

    const auto train_features = extract_feature_set(train_cycles, cnn);
    const PcaTransform pca = fit_pca(train_features, cfg.pca_s, cfg.pca_mode);

    std::vector<std::vector<double>> train_s;
    train_s.reserve(train_features.size());
    for (const auto& f : train_features) train_s.push_back(pca_apply(pca, f));

    AuthProfile profile;
    profile.cnn = cnn;
    profile.osvm = train_osvm(train_s, cfg.osvm_nu, cfg.osvm_gamma);
    profile.osvm.pca = pca;

    std::vector<double> pos_scores;
    if (!holdout_cycles.empty()) {
        for (const auto& f : extract_feature_set(holdout_cycles, cnn)) {
            pos_scores.push_back(score_feature(profile.osvm, f));
        }
    } else {
        for (const auto& s : train_s) pos_scores.push_back(osvm_score(profile.osvm, s));
    }

    std::vector<double> neg_scores;
    for (const auto& f : extract_feature_set(bank_cycles, cnn)) {
        neg_scores.push_back(score_feature(profile.osvm, f));
    }

    std::tie(profile.p1, profile.p0) = fit_score_models(pos_scores, neg_scores, cfg.score_family);
    profile.sprt = make_sprt_config(cfg.sprt_alpha, cfg.sprt_beta, cfg.sprt_max_cycles);
    return profile;
}

AuthReport authenticate_recording(const Recording& rec, const AuthProfile& profile,
                                  const PipelineConfig& cfg) {
    // Preprocessing must match the profile's feature extractor.
    PipelineConfig local = cfg;
    local.use_gyro = profile.cnn.arch.input_rows == 8;
    local.n_samples = profile.cnn.arch.input_cols;

    const PreprocessOutcome pre = preprocess_recording(rec, local);
    if (pre.cycles.empty()) {
        throw InsufficientDataError("authenticate: recording yielded no usable cycles");
    }

    AuthReport report;
    for (const auto& f : extract_feature_set(pre.cycles, profile.cnn)) {
        report.scores.push_back(score_feature(profile.osvm, f));
    }
    const SprtResult r = run_sprt(report.scores, profile.p0, profile.p1, profile.sprt);
    report.decision = r.decision;
    report.n_used = r.n_used;
    report.trace = r.trace;
    return report;
}

} // namespace gaitkit
