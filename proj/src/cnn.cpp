#include "gaitkit/cnn.hpp"

#include <algorithm>
#include <cmath>

#include "gaitkit/errors.hpp"
#include "gaitkit/rng.hpp"

namespace gaitkit {

namespace {

constexpr double kLogClamp = 1e-12;

// C (m x n) = A (m x k) * B (k x n), optionally accumulating. Every output
// element is produced by exactly one thread with a fixed summation order, so
// results are bit-identical for any thread count.
void gemm(int m, int k, int n, const double* a, const double* b, double* c, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::ptrdiff_t>(i) * n;
        if (!accumulate) {
            for (int j = 0; j < n; ++j) ci[j] = 0.0;
        }
        const double* ai = a + static_cast<std::ptrdiff_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            const double* bk = b + static_cast<std::ptrdiff_t>(kk) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

// C (m x n) (+)= A (m x k) * B^T where B is n x k.
void gemm_bt(int m, int k, int n, const double* a, const double* b, double* c, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::ptrdiff_t>(i) * k;
        double* ci = c + static_cast<std::ptrdiff_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<std::ptrdiff_t>(j) * k;
            double acc = 0.0;
            for (int kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
            if (accumulate) ci[j] += acc;
            else ci[j] = acc;
        }
    }
}

// C (m x n) = A^T * B where A is k x m and B is k x n.
void gemm_at(int m, int k, int n, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<std::ptrdiff_t>(i) * n;
        for (int j = 0; j < n; ++j) ci[j] = 0.0;
        for (int kk = 0; kk < k; ++kk) {
            const double av = a[static_cast<std::ptrdiff_t>(kk) * m + i];
            const double* bk = b + static_cast<std::ptrdiff_t>(kk) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

void check_input(const CycleMatrix& x, const CnnArchitecture& arch) {
    if (x.n_rows() != arch.input_rows || x.n_cols != arch.input_cols) {
        throw ValidationError("cnn: input shape " + std::to_string(x.n_rows()) + "x" +
                              std::to_string(x.n_cols) + " does not match architecture " +
                              std::to_string(arch.input_rows) + "x" +
                              std::to_string(arch.input_cols));
    }
    for (const auto& row : x.rows) {
        if (row.size() != static_cast<std::size_t>(x.n_cols)) {
            throw ValidationError("cnn: ragged input matrix");
        }
    }
}

void softmax(const std::vector<double>& logits, std::vector<double>& probs) {
    probs.resize(logits.size());
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - mx);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
}

} // namespace

std::size_t CnnArchitecture::weight_count() const {
    return static_cast<std::size_t>(cl1_kernels) * cl1_klen + cl1_kernels +
           static_cast<std::size_t>(cl2_kernels) * cl1_kernels * cl2_krows * cl2_klen +
           cl2_kernels + static_cast<std::size_t>(features) * fl1_inputs() + features +
           static_cast<std::size_t>(classes) * features + classes;
}

void CnnArchitecture::validate() const {
    if (cl1_kernels < 1 || cl2_kernels < 1 || features < 1 || classes < 1) {
        throw ValidationError("cnn architecture: kernel/feature/class counts must be >= 1");
    }
    if (input_rows < 1 || input_cols < 1 || cl1_klen < 1 || cl2_klen < 1 || cl2_krows < 1 ||
        pool_width < 1) {
        throw ValidationError("cnn architecture: sizes must be positive");
    }
    if (cl1_out_len() < 1 || cl2_out_rows() < 1 || cl2_out_len() < 1 || pool_out_len() < 1) {
        throw ValidationError("cnn architecture: derived layer shapes must be positive");
    }
}

void CnnModel::validate_shapes() const {
    arch.validate();
    auto want = [&](const std::vector<double>& v, std::size_t n, const char* name) {
        if (v.size() != n) {
            throw ValidationError(std::string("cnn model: bad shape for ") + name);
        }
        for (double x : v) {
            if (!std::isfinite(x)) throw ValidationError(std::string("cnn model: non-finite ") + name);
        }
    };
    want(cl1_w, static_cast<std::size_t>(arch.cl1_kernels) * arch.cl1_klen, "cl1_w");
    want(cl1_b, static_cast<std::size_t>(arch.cl1_kernels), "cl1_b");
    want(cl2_w,
         static_cast<std::size_t>(arch.cl2_kernels) * arch.cl1_kernels * arch.cl2_krows *
             arch.cl2_klen,
         "cl2_w");
    want(cl2_b, static_cast<std::size_t>(arch.cl2_kernels), "cl2_b");
    want(fl1_w, static_cast<std::size_t>(arch.features) * arch.fl1_inputs(), "fl1_w");
    want(fl1_b, static_cast<std::size_t>(arch.features), "fl1_b");
    want(fl2_w, static_cast<std::size_t>(arch.classes) * arch.features, "fl2_w");
    want(fl2_b, static_cast<std::size_t>(arch.classes), "fl2_b");
}

void CnnGradients::zero(const CnnArchitecture& arch) {
    cl1_w.assign(static_cast<std::size_t>(arch.cl1_kernels) * arch.cl1_klen, 0.0);
    cl1_b.assign(static_cast<std::size_t>(arch.cl1_kernels), 0.0);
    cl2_w.assign(static_cast<std::size_t>(arch.cl2_kernels) * arch.cl1_kernels * arch.cl2_krows *
                     arch.cl2_klen,
                 0.0);
    cl2_b.assign(static_cast<std::size_t>(arch.cl2_kernels), 0.0);
    fl1_w.assign(static_cast<std::size_t>(arch.features) * arch.fl1_inputs(), 0.0);
    fl1_b.assign(static_cast<std::size_t>(arch.features), 0.0);
    fl2_w.assign(static_cast<std::size_t>(arch.classes) * arch.features, 0.0);
    fl2_b.assign(static_cast<std::size_t>(arch.classes), 0.0);
}

void forward_ws(const CycleMatrix& x, const CnnModel& model, CnnWorkspace& ws) {
    const auto& arch = model.arch;
    check_input(x, arch);

    const int rows = arch.input_rows;
    const int l1 = arch.cl1_out_len();
    const int q1 = arch.cl1_kernels;
    const int q2 = arch.cl2_kernels;
    const int k1 = arch.cl1_klen;
    const int k2r = arch.cl2_krows;
    const int k2l = arch.cl2_klen;
    const int r2 = arch.cl2_out_rows();
    const int l2 = arch.cl2_out_len();
    const int p2 = arch.pool_out_len();
    const int pw = arch.pool_width;
    const int k_cols = q1 * k2r * k2l;  // im2col rows
    const int p_cols = r2 * l2;         // im2col columns
    const int fl1_in = arch.fl1_inputs();

    ws.cl1_out.resize(static_cast<std::size_t>(q1) * rows * l1);
    ws.col.resize(static_cast<std::size_t>(k_cols) * p_cols);
    ws.z2.resize(static_cast<std::size_t>(q2) * p_cols);
    ws.a2.resize(static_cast<std::size_t>(q2) * p_cols);
    ws.pooled.resize(static_cast<std::size_t>(fl1_in));
    ws.pool_arg.resize(static_cast<std::size_t>(fl1_in));
    ws.f_pre.resize(static_cast<std::size_t>(arch.features));
    ws.features.resize(static_cast<std::size_t>(arch.features));

    // CL1: per-row 1-D convolution, linear activations.
#pragma omp parallel for schedule(static)
    for (int q = 0; q < q1; ++q) {
        const double* wq = model.cl1_w.data() + static_cast<std::ptrdiff_t>(q) * k1;
        const double bq = model.cl1_b[static_cast<std::size_t>(q)];
        for (int r = 0; r < rows; ++r) {
            const double* xr = x.rows[static_cast<std::size_t>(r)].data();
            double* out =
                ws.cl1_out.data() + (static_cast<std::ptrdiff_t>(q) * rows + r) * l1;
            for (int t = 0; t < l1; ++t) {
                double acc = bq;
                for (int m = 0; m < k1; ++m) acc += wq[m] * xr[t + m];
                out[t] = acc;
            }
        }
    }

    // CL2 as a GEMM over the im2col expansion.
    for (int q = 0; q < q1; ++q) {
        for (int dr = 0; dr < k2r; ++dr) {
            for (int dt = 0; dt < k2l; ++dt) {
                const int col_row = (q * k2r + dr) * k2l + dt;
                double* dst = ws.col.data() + static_cast<std::ptrdiff_t>(col_row) * p_cols;
                for (int rr = 0; rr < r2; ++rr) {
                    const double* src =
                        ws.cl1_out.data() +
                        (static_cast<std::ptrdiff_t>(q) * rows + (rr + dr)) * l1 + dt;
                    double* d = dst + static_cast<std::ptrdiff_t>(rr) * l2;
                    for (int t = 0; t < l2; ++t) d[t] = src[t];
                }
            }
        }
    }
    gemm(q2, k_cols, p_cols, model.cl2_w.data(), ws.col.data(), ws.z2.data(), false);
    for (int c = 0; c < q2; ++c) {
        const double bc = model.cl2_b[static_cast<std::size_t>(c)];
        double* zc = ws.z2.data() + static_cast<std::ptrdiff_t>(c) * p_cols;
        double* ac = ws.a2.data() + static_cast<std::ptrdiff_t>(c) * p_cols;
        for (int p = 0; p < p_cols; ++p) ac[p] = std::tanh(zc[p] + bc);
    }

    // Max pool (1 x pool_width) over time.
    for (int c = 0; c < q2; ++c) {
        for (int rr = 0; rr < r2; ++rr) {
            const double* ac =
                ws.a2.data() + static_cast<std::ptrdiff_t>(c) * p_cols + static_cast<std::ptrdiff_t>(rr) * l2;
            const int base = (c * r2 + rr) * p2;
            for (int u = 0; u < p2; ++u) {
                int best = u * pw;
                for (int d = 1; d < pw && u * pw + d < l2; ++d) {
                    if (ac[u * pw + d] > ac[best]) best = u * pw + d;
                }
                ws.pooled[static_cast<std::size_t>(base + u)] = ac[best];
                ws.pool_arg[static_cast<std::size_t>(base + u)] = best;
            }
        }
    }

    // FL1 (tanh) and FL2 (softmax).
    for (int i = 0; i < arch.features; ++i) {
        const double* wi = model.fl1_w.data() + static_cast<std::ptrdiff_t>(i) * fl1_in;
        double acc = model.fl1_b[static_cast<std::size_t>(i)];
        for (int j = 0; j < fl1_in; ++j) acc += wi[j] * ws.pooled[static_cast<std::size_t>(j)];
        ws.f_pre[static_cast<std::size_t>(i)] = acc;
        ws.features[static_cast<std::size_t>(i)] = std::tanh(acc);
    }
    std::vector<double> logits(static_cast<std::size_t>(arch.classes));
    for (int kcls = 0; kcls < arch.classes; ++kcls) {
        const double* wk = model.fl2_w.data() + static_cast<std::ptrdiff_t>(kcls) * arch.features;
        double acc = model.fl2_b[static_cast<std::size_t>(kcls)];
        for (int i = 0; i < arch.features; ++i) acc += wk[i] * ws.features[static_cast<std::size_t>(i)];
        logits[static_cast<std::size_t>(kcls)] = acc;
    }
    softmax(logits, ws.probs);
}

ForwardResult forward(const CycleMatrix& x, const CnnModel& model) {
    CnnWorkspace ws;
    forward_ws(x, model, ws);
    return {ws.features, ws.probs};
}

std::vector<double> extract_features(const CycleMatrix& x, const CnnModel& model) {
    CnnWorkspace ws;
    forward_ws(x, model, ws);
    return ws.features;
}

double cross_entropy(const std::vector<double>& probs, int target_class) {
    if (target_class < 0 || static_cast<std::size_t>(target_class) >= probs.size()) {
        throw ValidationError("cross_entropy: target class out of range");
    }
    return -std::log(std::max(probs[static_cast<std::size_t>(target_class)], kLogClamp));
}

double gradients(const std::vector<const CycleMatrix*>& batch, const CnnModel& model,
                 CnnGradients& grads, CnnWorkspace& ws) {
    const auto& arch = model.arch;
    const int rows = arch.input_rows;
    const int l1 = arch.cl1_out_len();
    const int q1 = arch.cl1_kernels;
    const int q2 = arch.cl2_kernels;
    const int k1 = arch.cl1_klen;
    const int k2r = arch.cl2_krows;
    const int k2l = arch.cl2_klen;
    const int r2 = arch.cl2_out_rows();
    const int l2 = arch.cl2_out_len();
    const int p2 = arch.pool_out_len();
    const int k_cols = q1 * k2r * k2l;
    const int p_cols = r2 * l2;
    const int fl1_in = arch.fl1_inputs();
    const int f_cnt = arch.features;
    const int k_cls = arch.classes;

    double total_loss = 0.0;

    for (const CycleMatrix* sample : batch) {
        if (!sample->subject_label) throw ValidationError("gradients: unlabeled sample");
        const int target = *sample->subject_label;
        forward_ws(*sample, model, ws);
        total_loss += cross_entropy(ws.probs, target);

        // FL2 backward (softmax + cross-entropy).
        ws.d_logits.assign(static_cast<std::size_t>(k_cls), 0.0);
        for (int k = 0; k < k_cls; ++k) ws.d_logits[static_cast<std::size_t>(k)] = ws.probs[static_cast<std::size_t>(k)];
        ws.d_logits[static_cast<std::size_t>(target)] -= 1.0;

        ws.d_f.assign(static_cast<std::size_t>(f_cnt), 0.0);
        for (int k = 0; k < k_cls; ++k) {
            const double dk = ws.d_logits[static_cast<std::size_t>(k)];
            grads.fl2_b[static_cast<std::size_t>(k)] += dk;
            double* gw = grads.fl2_w.data() + static_cast<std::ptrdiff_t>(k) * f_cnt;
            const double* wk = model.fl2_w.data() + static_cast<std::ptrdiff_t>(k) * f_cnt;
            for (int i = 0; i < f_cnt; ++i) {
                gw[i] += dk * ws.features[static_cast<std::size_t>(i)];
                ws.d_f[static_cast<std::size_t>(i)] += dk * wk[i];
            }
        }

        // FL1 backward through tanh.
        for (int i = 0; i < f_cnt; ++i) {
            const double fi = ws.features[static_cast<std::size_t>(i)];
            ws.d_f[static_cast<std::size_t>(i)] *= (1.0 - fi * fi);
        }
        ws.d_pooled.assign(static_cast<std::size_t>(fl1_in), 0.0);
        for (int i = 0; i < f_cnt; ++i) {
            const double di = ws.d_f[static_cast<std::size_t>(i)];
            grads.fl1_b[static_cast<std::size_t>(i)] += di;
            double* gw = grads.fl1_w.data() + static_cast<std::ptrdiff_t>(i) * fl1_in;
            const double* wi = model.fl1_w.data() + static_cast<std::ptrdiff_t>(i) * fl1_in;
            for (int j = 0; j < fl1_in; ++j) {
                gw[j] += di * ws.pooled[static_cast<std::size_t>(j)];
                ws.d_pooled[static_cast<std::size_t>(j)] += di * wi[j];
            }
        }

        // Unpool and differentiate the CL2 tanh.
        ws.d_z2.assign(static_cast<std::size_t>(q2) * p_cols, 0.0);
        for (int c = 0; c < q2; ++c) {
            for (int rr = 0; rr < r2; ++rr) {
                const int base = (c * r2 + rr) * p2;
                for (int u = 0; u < p2; ++u) {
                    const int arg = ws.pool_arg[static_cast<std::size_t>(base + u)];
                    const std::ptrdiff_t idx =
                        static_cast<std::ptrdiff_t>(c) * p_cols + static_cast<std::ptrdiff_t>(rr) * l2 + arg;
                    const double a = ws.a2[static_cast<std::size_t>(idx)];
                    ws.d_z2[static_cast<std::size_t>(idx)] +=
                        ws.d_pooled[static_cast<std::size_t>(base + u)] * (1.0 - a * a);
                }
            }
        }

        // CL2 weight/bias gradients and gradient w.r.t. the im2col input.
        for (int c = 0; c < q2; ++c) {
            const double* dz = ws.d_z2.data() + static_cast<std::ptrdiff_t>(c) * p_cols;
            double acc = 0.0;
            for (int p = 0; p < p_cols; ++p) acc += dz[p];
            grads.cl2_b[static_cast<std::size_t>(c)] += acc;
        }
        gemm_bt(q2, p_cols, k_cols, ws.d_z2.data(), ws.col.data(), grads.cl2_w.data(), true);
        ws.d_col.resize(static_cast<std::size_t>(k_cols) * p_cols);
        gemm_at(k_cols, q2, p_cols, model.cl2_w.data(), ws.d_z2.data(), ws.d_col.data());

        // col2im scatter back to the CL1 output grid.
        ws.d_cl1.assign(static_cast<std::size_t>(q1) * rows * l1, 0.0);
        for (int q = 0; q < q1; ++q) {
            for (int dr = 0; dr < k2r; ++dr) {
                for (int dt = 0; dt < k2l; ++dt) {
                    const int col_row = (q * k2r + dr) * k2l + dt;
                    const double* src = ws.d_col.data() + static_cast<std::ptrdiff_t>(col_row) * p_cols;
                    for (int rr = 0; rr < r2; ++rr) {
                        double* dst = ws.d_cl1.data() +
                                      (static_cast<std::ptrdiff_t>(q) * rows + (rr + dr)) * l1 + dt;
                        const double* s = src + static_cast<std::ptrdiff_t>(rr) * l2;
                        for (int t = 0; t < l2; ++t) dst[t] += s[t];
                    }
                }
            }
        }

        // CL1 gradients (linear activations).
#pragma omp parallel for schedule(static)
        for (int q = 0; q < q1; ++q) {
            double* gw = grads.cl1_w.data() + static_cast<std::ptrdiff_t>(q) * k1;
            double bacc = 0.0;
            for (int r = 0; r < rows; ++r) {
                const double* dq = ws.d_cl1.data() + (static_cast<std::ptrdiff_t>(q) * rows + r) * l1;
                const double* xr = sample->rows[static_cast<std::size_t>(r)].data();
                for (int t = 0; t < l1; ++t) {
                    const double d = dq[t];
                    bacc += d;
                    for (int m = 0; m < k1; ++m) gw[m] += d * xr[t + m];
                }
            }
            grads.cl1_b[static_cast<std::size_t>(q)] += bacc;
        }
    }
    return total_loss;
}

namespace {

void init_model(CnnModel& model, Rng& rng) {
    const auto& arch = model.arch;
    auto glorot = [&](std::vector<double>& w, std::size_t count, int fan_in, int fan_out) {
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        w.resize(count);
        for (auto& v : w) v = rng.uniform(-s, s);
    };
    glorot(model.cl1_w, static_cast<std::size_t>(arch.cl1_kernels) * arch.cl1_klen, arch.cl1_klen,
           arch.cl1_klen * arch.cl1_kernels);
    model.cl1_b.assign(static_cast<std::size_t>(arch.cl1_kernels), 0.0);
    const int k2_span = arch.cl1_kernels * arch.cl2_krows * arch.cl2_klen;
    glorot(model.cl2_w, static_cast<std::size_t>(arch.cl2_kernels) * k2_span, k2_span,
           arch.cl2_krows * arch.cl2_klen * arch.cl2_kernels);
    model.cl2_b.assign(static_cast<std::size_t>(arch.cl2_kernels), 0.0);
    glorot(model.fl1_w, static_cast<std::size_t>(arch.features) * arch.fl1_inputs(),
           arch.fl1_inputs(), arch.features);
    model.fl1_b.assign(static_cast<std::size_t>(arch.features), 0.0);
    glorot(model.fl2_w, static_cast<std::size_t>(arch.classes) * arch.features, arch.features,
           arch.classes);
    model.fl2_b.assign(static_cast<std::size_t>(arch.classes), 0.0);
}

void sgd_step(std::vector<double>& w, const std::vector<double>& g, double step) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
}

double mean_loss(const std::vector<const CycleMatrix*>& set, const CnnModel& model,
                 CnnWorkspace& ws) {
    double acc = 0.0;
    for (const CycleMatrix* s : set) {
        forward_ws(*s, model, ws);
        acc += cross_entropy(ws.probs, *s->subject_label);
    }
    return set.empty() ? 0.0 : acc / static_cast<double>(set.size());
}

int predict_class(const CycleMatrix& x, const CnnModel& model, CnnWorkspace& ws) {
    forward_ws(x, model, ws);
    int best = 0;
    for (std::size_t k = 1; k < ws.probs.size(); ++k) {
        if (ws.probs[k] > ws.probs[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    }
    return best;
}

} // namespace

TrainResult train(const std::vector<CycleMatrix>& dataset, const CnnArchitecture& arch_in,
                  const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw ParameterError("train: batch_size must be >= 1");
    if (cfg.patience < 1) throw ParameterError("train: patience must be >= 1");

    // Map original labels to contiguous class indices.
    std::vector<int> labels;
    for (const auto& x : dataset) {
        if (!x.subject_label) throw ValidationError("train: dataset contains unlabeled cycles");
        labels.push_back(*x.subject_label);
    }
    std::vector<int> unique_labels = labels;
    std::sort(unique_labels.begin(), unique_labels.end());
    unique_labels.erase(std::unique(unique_labels.begin(), unique_labels.end()),
                        unique_labels.end());
    const int k_cls = static_cast<int>(unique_labels.size());
    if (k_cls < 2) throw ValidationError("train: need at least 2 classes");

    auto class_of = [&](int label) {
        return static_cast<int>(std::lower_bound(unique_labels.begin(), unique_labels.end(), label) -
                                unique_labels.begin());
    };

    CnnArchitecture arch = arch_in;
    arch.classes = k_cls;
    arch.validate();

    // Relabeled working copies so class indices are contiguous.
    std::vector<CycleMatrix> data = dataset;
    for (auto& x : data) x.subject_label = class_of(*x.subject_label);

    const int n_val = std::max(1, static_cast<int>(std::llround(cfg.validation_fraction *
                                                                cfg.train_per_class)));
    Rng rng(cfg.seed);

    std::vector<const CycleMatrix*> train_set, val_set, test_set;
    for (int c = 0; c < k_cls; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (*data[i].subject_label == c) idx.push_back(i);
        }
        const std::size_t need = static_cast<std::size_t>(cfg.train_per_class) +
                                 static_cast<std::size_t>(cfg.test_per_class) +
                                 static_cast<std::size_t>(n_val);
        if (idx.size() < need) {
            throw InsufficientDataError(
                "train: class " + std::to_string(unique_labels[static_cast<std::size_t>(c)]) +
                " has " + std::to_string(idx.size()) + " cycles, needs " + std::to_string(need));
        }
        rng.shuffle(idx);
        std::size_t at = 0;
        for (int i = 0; i < cfg.test_per_class; ++i) test_set.push_back(&data[idx[at++]]);
        for (int i = 0; i < cfg.train_per_class; ++i) train_set.push_back(&data[idx[at++]]);
        for (int i = 0; i < n_val; ++i) val_set.push_back(&data[idx[at++]]);
    }

    CnnModel model;
    model.arch = arch;
    init_model(model, rng);
    model.meta.seed = cfg.seed;

    CnnWorkspace ws;
    CnnGradients grads;

    CnnModel best_model = model;
    double best_val = mean_loss(val_set, model, ws);
    int since_best = 0;
    int epochs_run = 0;
    double last_train_loss = 0.0;

    std::vector<const CycleMatrix*> order = train_set;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const CycleMatrix*> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                  order.begin() + static_cast<std::ptrdiff_t>(end));
            grads.zero(arch);
            epoch_loss += gradients(batch, model, grads, ws);
            const double step = cfg.learning_rate / static_cast<double>(batch.size());
            sgd_step(model.cl1_w, grads.cl1_w, step);
            sgd_step(model.cl1_b, grads.cl1_b, step);
            sgd_step(model.cl2_w, grads.cl2_w, step);
            sgd_step(model.cl2_b, grads.cl2_b, step);
            sgd_step(model.fl1_w, grads.fl1_w, step);
            sgd_step(model.fl1_b, grads.fl1_b, step);
            sgd_step(model.fl2_w, grads.fl2_w, step);
            sgd_step(model.fl2_b, grads.fl2_b, step);
        }
        epochs_run = epoch;
        last_train_loss = epoch_loss / static_cast<double>(order.size());

        const double val = mean_loss(val_set, model, ws);
        if (val < best_val) {
            best_val = val;
            best_model = model;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    best_model.meta.seed = cfg.seed;
    best_model.meta.epochs_run = epochs_run;
    best_model.meta.best_val_loss = best_val;
    best_model.meta.final_train_loss = last_train_loss;

    TrainResult result;
    result.confusion.assign(static_cast<std::size_t>(k_cls), std::vector<int>(static_cast<std::size_t>(k_cls), 0));
    int correct = 0;
    for (const CycleMatrix* s : test_set) {
        const int pred = predict_class(*s, best_model, ws);
        result.confusion[static_cast<std::size_t>(*s->subject_label)][static_cast<std::size_t>(pred)]++;
        if (pred == *s->subject_label) ++correct;
    }
    result.test_accuracy =
        test_set.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test_set.size());
    best_model.meta.test_accuracy = result.test_accuracy;
    result.class_labels = unique_labels;
    result.model = std::move(best_model);
    return result;
}

} // namespace gaitkit
