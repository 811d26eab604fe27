#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gaitkit/cnn.hpp"
#include "gaitkit/errors.hpp"
#include "gaitkit/normalize.hpp"
#include "gaitkit/rng.hpp"
#include "test_support.hpp"

using namespace gaitkit;
using namespace gaitkit::testsupport;

namespace {

CnnArchitecture tiny_arch(int rows = 8, int cols = 20, int classes = 2) {
    CnnArchitecture a;
    a.input_rows = rows;
    a.input_cols = cols;
    a.cl1_kernels = 1;
    a.cl2_kernels = 1;
    a.features = 2;
    a.classes = classes;
    return a;
}

CnnModel random_model(const CnnArchitecture& arch, std::uint64_t seed, double scale = 0.3) {
    CnnModel m;
    m.arch = arch;
    Rng rng(seed);
    auto fill = [&](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (auto& x : v) x = scale * rng.normal();
    };
    fill(m.cl1_w, static_cast<std::size_t>(arch.cl1_kernels) * arch.cl1_klen);
    fill(m.cl1_b, static_cast<std::size_t>(arch.cl1_kernels));
    fill(m.cl2_w, static_cast<std::size_t>(arch.cl2_kernels) * arch.cl1_kernels * arch.cl2_krows *
                      arch.cl2_klen);
    fill(m.cl2_b, static_cast<std::size_t>(arch.cl2_kernels));
    fill(m.fl1_w, static_cast<std::size_t>(arch.features) * arch.fl1_inputs());
    fill(m.fl1_b, static_cast<std::size_t>(arch.features));
    fill(m.fl2_w, static_cast<std::size_t>(arch.classes) * arch.features);
    fill(m.fl2_b, static_cast<std::size_t>(arch.classes));
    return m;
}

CycleMatrix random_input(const CnnArchitecture& arch, std::uint64_t seed, int label = 0) {
    Rng rng(seed);
    CycleMatrix x;
    x.n_cols = arch.input_cols;
    x.subject_label = label;
    for (int r = 0; r < arch.input_rows; ++r) {
        std::vector<double> row(static_cast<std::size_t>(arch.input_cols));
        for (auto& v : row) v = rng.normal();
        x.rows.push_back(std::move(row));
    }
    return x;
}

// Independent forward pass written as plain nested loops over the layer
// definitions; shares no code with the library path.
ForwardResult oracle_forward(const CycleMatrix& x, const CnnModel& m) {
    const auto& a = m.arch;
    const int l1 = a.input_cols - a.cl1_klen + 1;
    std::vector<std::vector<std::vector<double>>> cl1(
        static_cast<std::size_t>(a.cl1_kernels),
        std::vector<std::vector<double>>(static_cast<std::size_t>(a.input_rows),
                                         std::vector<double>(static_cast<std::size_t>(l1), 0.0)));
    for (int q = 0; q < a.cl1_kernels; ++q) {
        for (int r = 0; r < a.input_rows; ++r) {
            for (int t = 0; t < l1; ++t) {
                double acc = m.cl1_b[static_cast<std::size_t>(q)];
                for (int k = 0; k < a.cl1_klen; ++k) {
                    acc += m.cl1_w[static_cast<std::size_t>(q * a.cl1_klen + k)] *
                           x.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(t + k)];
                }
                cl1[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)]
                   [static_cast<std::size_t>(t)] = acc;
            }
        }
    }

    const int r2 = a.input_rows - a.cl2_krows + 1;
    const int l2 = l1 - a.cl2_klen + 1;
    std::vector<std::vector<std::vector<double>>> cl2(
        static_cast<std::size_t>(a.cl2_kernels),
        std::vector<std::vector<double>>(static_cast<std::size_t>(r2),
                                         std::vector<double>(static_cast<std::size_t>(l2), 0.0)));
    for (int c = 0; c < a.cl2_kernels; ++c) {
        for (int rr = 0; rr < r2; ++rr) {
            for (int t = 0; t < l2; ++t) {
                double acc = m.cl2_b[static_cast<std::size_t>(c)];
                for (int q = 0; q < a.cl1_kernels; ++q) {
                    for (int dr = 0; dr < a.cl2_krows; ++dr) {
                        for (int dt = 0; dt < a.cl2_klen; ++dt) {
                            const std::size_t w_idx = static_cast<std::size_t>(
                                ((c * a.cl1_kernels + q) * a.cl2_krows + dr) * a.cl2_klen + dt);
                            acc += m.cl2_w[w_idx] * cl1[static_cast<std::size_t>(q)]
                                                       [static_cast<std::size_t>(rr + dr)]
                                                       [static_cast<std::size_t>(t + dt)];
                        }
                    }
                }
                cl2[static_cast<std::size_t>(c)][static_cast<std::size_t>(rr)]
                   [static_cast<std::size_t>(t)] = std::tanh(acc);
            }
        }
    }

    const int p2 = l2 / a.pool_width;
    std::vector<double> pooled;
    for (int c = 0; c < a.cl2_kernels; ++c) {
        for (int rr = 0; rr < r2; ++rr) {
            for (int u = 0; u < p2; ++u) {
                double best = cl2[static_cast<std::size_t>(c)][static_cast<std::size_t>(rr)]
                                 [static_cast<std::size_t>(u * a.pool_width)];
                for (int d = 1; d < a.pool_width; ++d) {
                    best = std::max(best, cl2[static_cast<std::size_t>(c)]
                                             [static_cast<std::size_t>(rr)]
                                             [static_cast<std::size_t>(u * a.pool_width + d)]);
                }
                pooled.push_back(best);
            }
        }
    }

    ForwardResult out;
    for (int i = 0; i < a.features; ++i) {
        double acc = m.fl1_b[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < pooled.size(); ++j) {
            acc += m.fl1_w[static_cast<std::size_t>(i) * pooled.size() + j] * pooled[j];
        }
        out.features.push_back(std::tanh(acc));
    }
    std::vector<double> logits;
    for (int k = 0; k < a.classes; ++k) {
        double acc = m.fl2_b[static_cast<std::size_t>(k)];
        for (int i = 0; i < a.features; ++i) {
            acc += m.fl2_w[static_cast<std::size_t>(k * a.features + i)] *
                   out.features[static_cast<std::size_t>(i)];
        }
        logits.push_back(acc);
    }
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    for (double v : logits) out.probs.push_back(std::exp(v - mx) / sum);
    return out;
}

// Separable toy cycles: class-specific waveform plus mild noise.
std::vector<CycleMatrix> toy_dataset(int per_class, int classes, const CnnArchitecture& arch,
                                     std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CycleMatrix> data;
    for (int cls = 0; cls < classes; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            CycleMatrix x;
            x.n_cols = arch.input_cols;
            x.subject_label = cls;
            for (int r = 0; r < arch.input_rows; ++r) {
                std::vector<double> row(static_cast<std::size_t>(arch.input_cols));
                for (std::size_t t = 0; t < row.size(); ++t) {
                    const double ph =
                        2.0 * M_PI * static_cast<double>(t) / static_cast<double>(row.size());
                    row[t] = std::sin((cls + 2.0) * ph + 0.4 * r) + 0.15 * rng.normal();
                }
                x.rows.push_back(zscore(row));
            }
            data.push_back(std::move(x));
        }
    }
    return data;
}

} // namespace

TEST_CASE("forward with zero weights is the uniform softmax") {
    CnnArchitecture arch = tiny_arch(8, 20, 4);
    CnnModel m = random_model(arch, 1, 0.0); // all zeros
    const ForwardResult out = forward(random_input(arch, 2), m);
    for (double p : out.probs) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("forward output is a probability vector") {
    CnnArchitecture arch = tiny_arch(8, 20, 3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const CnnModel m = random_model(arch, seed, 0.8);
        const ForwardResult out = forward(random_input(arch, seed * 7), m);
        double sum = 0.0;
        for (double p : out.probs) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("forward matches the loop oracle on a tiny model") {
    CnnArchitecture arch = tiny_arch(8, 20, 2);
    const CnnModel m = random_model(arch, 5);
    const CycleMatrix x = random_input(arch, 6);
    const ForwardResult lib = forward(x, m);
    const ForwardResult oracle = oracle_forward(x, m);
    CHECK(max_abs_diff(lib.features, oracle.features) < 1e-9);
    CHECK(max_abs_diff(lib.probs, oracle.probs) < 1e-9);
}

TEST_CASE("forward matches the loop oracle on a wider model") {
    CnnArchitecture arch;
    arch.input_rows = 8;
    arch.input_cols = 30;
    arch.cl1_kernels = 3;
    arch.cl2_kernels = 4;
    arch.features = 5;
    arch.classes = 3;
    const CnnModel m = random_model(arch, 9);
    const CycleMatrix x = random_input(arch, 10);
    const ForwardResult lib = forward(x, m);
    const ForwardResult oracle = oracle_forward(x, m);
    CHECK(max_abs_diff(lib.features, oracle.features) < 1e-9);
    CHECK(max_abs_diff(lib.probs, oracle.probs) < 1e-9);
}

TEST_CASE("cross_entropy on reference values") {
    CHECK(cross_entropy({1.0, 0.0}, 0) == doctest::Approx(0.0));
    CHECK(cross_entropy({0.25, 0.25, 0.25, 0.25}, 2) == doctest::Approx(std::log(4.0)));
    CHECK(cross_entropy({0.5, 0.5}, 1) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("gradients match central finite differences") {
    CnnArchitecture arch = tiny_arch(8, 20, 2);
    CnnModel m = random_model(arch, 11);
    const CycleMatrix x0 = random_input(arch, 12, 0);
    const CycleMatrix x1 = random_input(arch, 13, 1);
    const std::vector<const CycleMatrix*> batch{&x0, &x1};

    CnnGradients grads;
    grads.zero(arch);
    CnnWorkspace ws;
    gradients(batch, m, grads, ws);

    auto batch_loss = [&]() {
        double acc = 0.0;
        for (const auto* s : batch) acc += cross_entropy(forward(*s, m).probs, *s->subject_label);
        return acc;
    };

    struct Slot {
        std::vector<double>* w;
        std::vector<double>* g;
    };
    std::vector<Slot> slots{{&m.cl1_w, &grads.cl1_w}, {&m.cl1_b, &grads.cl1_b},
                            {&m.cl2_w, &grads.cl2_w}, {&m.cl2_b, &grads.cl2_b},
                            {&m.fl1_w, &grads.fl1_w}, {&m.fl1_b, &grads.fl1_b},
                            {&m.fl2_w, &grads.fl2_w}, {&m.fl2_b, &grads.fl2_b}};

    Rng rng(17);
    const double h = 1e-4;
    for (int probe = 0; probe < 64; ++probe) {
        auto& slot = slots[rng.uniform_index(slots.size())];
        const std::size_t i = rng.uniform_index(slot.w->size());
        const double keep = (*slot.w)[i];
        (*slot.w)[i] = keep + h;
        const double up = batch_loss();
        (*slot.w)[i] = keep - h;
        const double down = batch_loss();
        (*slot.w)[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double an = (*slot.g)[i];
        const double rel = std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-7});
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("gradients are additive over duplicated samples") {
    CnnArchitecture arch = tiny_arch(8, 20, 2);
    const CnnModel m = random_model(arch, 19);
    const CycleMatrix x = random_input(arch, 20, 1);

    CnnGradients once, twice;
    once.zero(arch);
    twice.zero(arch);
    CnnWorkspace ws;
    gradients({&x}, m, once, ws);
    gradients({&x, &x}, m, twice, ws);
    for (std::size_t i = 0; i < once.cl2_w.size(); ++i) {
        CHECK(twice.cl2_w[i] == doctest::Approx(2.0 * once.cl2_w[i]));
    }
    for (std::size_t i = 0; i < once.fl1_w.size(); ++i) {
        CHECK(twice.fl1_w[i] == doctest::Approx(2.0 * once.fl1_w[i]));
    }
}

TEST_CASE("zero input with zero biases leaves CL1 weight gradients zero") {
    CnnArchitecture arch = tiny_arch(8, 20, 2);
    CnnModel m = random_model(arch, 21);
    for (auto& b : m.cl1_b) b = 0.0;
    CycleMatrix x;
    x.n_cols = arch.input_cols;
    x.subject_label = 0;
    x.rows.assign(static_cast<std::size_t>(arch.input_rows),
                  std::vector<double>(static_cast<std::size_t>(arch.input_cols), 0.0));

    CnnGradients grads;
    grads.zero(arch);
    CnnWorkspace ws;
    gradients({&x}, m, grads, ws);
    for (double g : grads.cl1_w) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("train separates a two-class toy problem") {
    CnnArchitecture arch = tiny_arch(8, 40, 2);
    arch.cl1_kernels = 2;
    arch.cl2_kernels = 3;
    arch.features = 8;
    const auto data = toy_dataset(60, 2, arch, 23);

    TrainConfig cfg;
    cfg.seed = 7;
    cfg.train_per_class = 20;
    cfg.test_per_class = 20;
    cfg.max_epochs = 200;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.05;
    const TrainResult r = train(data, arch, cfg);
    CHECK(r.test_accuracy >= 0.95);
}

TEST_CASE("train runs to max_epochs when patience cannot trigger") {
    CnnArchitecture arch = tiny_arch(8, 40, 2);
    arch.cl1_kernels = 2;
    arch.cl2_kernels = 3;
    arch.features = 8;
    const auto data = toy_dataset(60, 2, arch, 29);

    TrainConfig cfg;
    cfg.seed = 3;
    cfg.train_per_class = 20;
    cfg.test_per_class = 20;
    cfg.max_epochs = 10; // < patience: the early-stop rule can never fire
    const TrainResult r = train(data, arch, cfg);
    CHECK(r.model.meta.epochs_run == 10);
}

TEST_CASE("train stops after exactly `patience` epochs without improvement") {
    CnnArchitecture arch = tiny_arch(8, 40, 2);
    arch.cl1_kernels = 2;
    arch.cl2_kernels = 3;
    arch.features = 8;
    const auto data = toy_dataset(60, 2, arch, 31);

    TrainConfig cfg;
    cfg.seed = 5;
    cfg.train_per_class = 20;
    cfg.test_per_class = 20;
    cfg.max_epochs = 400;
    cfg.learning_rate = 0.0; // frozen weights: the validation loss never improves
    const TrainResult r = train(data, arch, cfg);
    CHECK(r.model.meta.epochs_run == cfg.patience);
}

TEST_CASE("train names the class with insufficient cycles") {
    CnnArchitecture arch = tiny_arch(8, 40, 2);
    auto data = toy_dataset(60, 2, arch, 37);
    std::vector<CycleMatrix> starved;
    int kept = 0;
    for (auto& x : data) {
        if (*x.subject_label == 1 && ++kept > 10) continue;
        starved.push_back(x);
    }
    TrainConfig cfg;
    cfg.train_per_class = 20;
    cfg.test_per_class = 20;
    try {
        train(starved, arch, cfg);
        FAIL("expected InsufficientDataError");
    } catch (const InsufficientDataError& e) {
        CHECK(std::string(e.what()).find("class 1") != std::string::npos);
    }
}

TEST_CASE("training loss is non-increasing at a small learning rate") {
    CnnArchitecture arch = tiny_arch(8, 40, 2);
    arch.cl1_kernels = 2;
    arch.cl2_kernels = 3;
    arch.features = 8;
    const auto data = toy_dataset(40, 2, arch, 41);

    TrainConfig cfg;
    cfg.seed = 11;
    cfg.train_per_class = 16;
    cfg.test_per_class = 16;
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 32; // = |T|, full batch
    std::vector<double> losses;
    for (int epochs : {1, 2, 4, 8, 16, 32}) {
        TrainConfig c2 = cfg;
        c2.max_epochs = epochs;
        const TrainResult r = train(data, arch, c2);
        losses.push_back(r.model.meta.final_train_loss);
    }
    for (std::size_t i = 1; i < losses.size(); ++i) {
        CHECK(losses[i] <= losses[i - 1] * 1.01);
    }
}

TEST_CASE("train is deterministic for a fixed seed") {
    CnnArchitecture arch = tiny_arch(8, 40, 2);
    arch.cl1_kernels = 2;
    arch.cl2_kernels = 3;
    arch.features = 8;
    const auto data = toy_dataset(60, 2, arch, 43);

    TrainConfig cfg;
    cfg.seed = 13;
    cfg.train_per_class = 20;
    cfg.test_per_class = 20;
    cfg.max_epochs = 20;
    const TrainResult a = train(data, arch, cfg);
    const TrainResult b = train(data, arch, cfg);
    REQUIRE(a.model.cl2_w.size() == b.model.cl2_w.size());
    for (std::size_t i = 0; i < a.model.cl2_w.size(); ++i) {
        CHECK(a.model.cl2_w[i] == b.model.cl2_w[i]);
    }
    for (std::size_t i = 0; i < a.model.fl1_w.size(); ++i) {
        CHECK(a.model.fl1_w[i] == b.model.fl1_w[i]);
    }
    CHECK(a.test_accuracy == b.test_accuracy);
}

TEST_CASE("extract_features equals the forward feature head") {
    CnnArchitecture arch = tiny_arch(8, 20, 2);
    const CnnModel m = random_model(arch, 47);
    const CycleMatrix x = random_input(arch, 48);
    const auto f1 = extract_features(x, m);
    const auto f2 = forward(x, m).features;
    REQUIRE(f1.size() == f2.size());
    for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);

    const auto f3 = extract_features(x, m);
    for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f3[i]);
}

TEST_CASE("features of unseen classes cluster by subject") {
    CnnArchitecture arch = tiny_arch(8, 40, 3);
    arch.cl1_kernels = 2;
    arch.cl2_kernels = 3;
    arch.features = 8;
    const auto train_data = toy_dataset(60, 3, arch, 53);

    TrainConfig cfg;
    cfg.seed = 17;
    cfg.train_per_class = 20;
    cfg.test_per_class = 20;
    cfg.max_epochs = 120;
    cfg.learning_rate = 0.05;
    const TrainResult r = train(train_data, arch, cfg);

    // Two waveform classes the network never saw (indices 4 and 5).
    auto make_unseen = [&](int cls, std::uint64_t seed) {
        auto set = toy_dataset(12, cls + 1, arch, seed);
        std::vector<CycleMatrix> only;
        for (auto& x : set) {
            if (*x.subject_label == cls) only.push_back(x);
        }
        return only;
    };
    const auto ua = make_unseen(4, 61);
    const auto ub = make_unseen(5, 67);

    std::vector<std::vector<double>> fa, fb;
    for (const auto& x : ua) fa.push_back(extract_features(x, r.model));
    for (const auto& x : ub) fb.push_back(extract_features(x, r.model));

    auto dist = [](const std::vector<double>& p, const std::vector<double>& q) {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - q[i]) * (p[i] - q[i]);
        return std::sqrt(acc);
    };
    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        for (std::size_t j = i + 1; j < fa.size(); ++j, ++n_intra) intra += dist(fa[i], fa[j]);
    }
    for (std::size_t i = 0; i < fb.size(); ++i) {
        for (std::size_t j = i + 1; j < fb.size(); ++j, ++n_intra) intra += dist(fb[i], fb[j]);
    }
    for (const auto& p : fa) {
        for (const auto& q : fb) {
            inter += dist(p, q);
            ++n_inter;
        }
    }
    CHECK(intra / n_intra < inter / n_inter);
}
