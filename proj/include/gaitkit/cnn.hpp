#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gaitkit/normalize.hpp"

namespace gaitkit {

// Two convolutional layers, max-pool over time, two fully connected layers.
// CL1 runs one-dimensional kernels per input row with linear activations;
// CL2 mixes rows with kernels spanning all CL1 maps (tanh); FL1 yields the
// feature vector f (tanh); FL2 yields class probabilities via softmax.
struct CnnArchitecture {
    int input_rows = 8;
    int input_cols = 200;
    int cl1_kernels = 20; // q1
    int cl2_kernels = 40; // q2
    int cl1_klen = 10;
    int cl2_krows = 4;
    int cl2_klen = 10;
    int pool_width = 2;
    int features = 40; // F
    int classes = 2;   // K

    int cl1_out_len() const { return input_cols - cl1_klen + 1; }
    int cl2_out_rows() const { return input_rows - cl2_krows + 1; }
    int cl2_out_len() const { return cl1_out_len() - cl2_klen + 1; }
    int pool_out_len() const { return cl2_out_len() / pool_width; }
    int fl1_inputs() const { return cl2_kernels * cl2_out_rows() * pool_out_len(); }
    std::size_t weight_count() const;

    void validate() const;
    bool operator==(const CnnArchitecture&) const = default;
};

struct TrainMeta {
    std::uint64_t seed = 0;
    int epochs_run = 0;
    double best_val_loss = 0.0;
    double final_train_loss = 0.0;
    double test_accuracy = 0.0;
};

struct CnnModel {
    CnnArchitecture arch;
    std::vector<double> cl1_w, cl1_b; // q1*k1len ; q1
    std::vector<double> cl2_w, cl2_b; // q2*q1*k2rows*k2len ; q2
    std::vector<double> fl1_w, fl1_b; // F*fl1_in ; F
    std::vector<double> fl2_w, fl2_b; // K*F ; K
    TrainMeta meta;

    void validate_shapes() const;
};

// Gradients (or any per-weight quantity) in model layout.
struct CnnGradients {
    std::vector<double> cl1_w, cl1_b;
    std::vector<double> cl2_w, cl2_b;
    std::vector<double> fl1_w, fl1_b;
    std::vector<double> fl2_w, fl2_b;

    void zero(const CnnArchitecture& arch);
};

struct ForwardResult {
    std::vector<double> features; // f, FL1 output
    std::vector<double> probs;    // y, softmax output
};

// Scratch buffers reused across forward/backward calls.
struct CnnWorkspace {
    std::vector<double> cl1_out, col, z2, a2, pooled;
    std::vector<int> pool_arg;
    std::vector<double> f_pre, features, probs;
    std::vector<double> d_logits, d_f, d_pooled, d_z2, d_col, d_cl1;
};

ForwardResult forward(const CycleMatrix& x, const CnnModel& model);
void forward_ws(const CycleMatrix& x, const CnnModel& model, CnnWorkspace& ws);

// Categorical cross-entropy of one prediction against a one-hot target
// class; probabilities are clamped at 1e-12 inside the log.
double cross_entropy(const std::vector<double>& probs, int target_class);

// Exact gradients of the summed batch loss; accumulates into `grads`
// (call grads.zero first). Returns the summed batch loss.
double gradients(const std::vector<const CycleMatrix*>& batch, const CnnModel& model,
                 CnnGradients& grads, CnnWorkspace& ws);

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 32;
    int max_epochs = 500;
    int patience = 20;
    std::uint64_t seed = 1;
    int train_per_class = 40;      // N_c
    int test_per_class = 100;      // N_t
    double validation_fraction = 0.25; // of N_c, at least 1 cycle
};

struct TrainResult {
    CnnModel model;
    double test_accuracy = 0.0;
    std::vector<std::vector<int>> confusion; // [true][predicted]
    std::vector<int> class_labels;           // sorted original labels
};

// Supervised SGD with per-class random splits, early stopping on the
// validation loss (20-epoch patience), and restoration of the best-epoch
// weights. Deterministic given the seed.
TrainResult train(const std::vector<CycleMatrix>& dataset, const CnnArchitecture& arch,
                  const TrainConfig& cfg);

// Forward pass truncated at FL1.
std::vector<double> extract_features(const CycleMatrix& x, const CnnModel& model);

} // namespace gaitkit
