#include "gaitkit/config.hpp"

#include <fstream>
#include <sstream>

#include "gaitkit/errors.hpp"

namespace gaitkit {

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParameterError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ParameterError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ParameterError("config: bad boolean value for " + key + ": '" + v + "'");
}

} // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    if (key == "rate_hz") rate_hz = to_double(key, value);
    else if (key == "fir_cutoff_hz") fir_cutoff_hz = to_double(key, value);
    else if (key == "fir_taps") fir_taps = to_int(key, value);
    else if (key == "cycle_cutoff_hz") cycle_cutoff_hz = to_double(key, value);
    else if (key == "phi_th") phi_th = to_double(key, value);
    else if (key == "n_samples") n_samples = to_int(key, value);
    else if (key == "use_gyro") use_gyro = to_bool(key, value);
    else if (key == "cnn_q1") arch.cl1_kernels = to_int(key, value);
    else if (key == "cnn_q2") arch.cl2_kernels = to_int(key, value);
    else if (key == "cnn_features") arch.features = to_int(key, value);
    else if (key == "cnn_k1_len") arch.cl1_klen = to_int(key, value);
    else if (key == "cnn_k2_rows") arch.cl2_krows = to_int(key, value);
    else if (key == "cnn_k2_len") arch.cl2_klen = to_int(key, value);
    else if (key == "cnn_pool") arch.pool_width = to_int(key, value);
    else if (key == "learning_rate") train.learning_rate = to_double(key, value);
    else if (key == "batch_size") train.batch_size = to_int(key, value);
    else if (key == "max_epochs") train.max_epochs = to_int(key, value);
    else if (key == "patience") train.patience = to_int(key, value);
    else if (key == "train_per_class") train.train_per_class = to_int(key, value);
    else if (key == "test_per_class") train.test_per_class = to_int(key, value);
    else if (key == "validation_fraction") train.validation_fraction = to_double(key, value);
    else if (key == "osvm_nu") osvm_nu = to_double(key, value);
    else if (key == "osvm_gamma") osvm_gamma = to_double(key, value);
    else if (key == "pca_s") pca_s = to_int(key, value);
    else if (key == "pca_mode") pca_mode = pca_mode_from_name(value);
    else if (key == "enroll_max_cycles") enroll_max_cycles = to_int(key, value);
    else if (key == "sprt_alpha") sprt_alpha = to_double(key, value);
    else if (key == "sprt_beta") sprt_beta = to_double(key, value);
    else if (key == "sprt_max_cycles") sprt_max_cycles = to_int(key, value);
    else if (key == "score_family") score_family = score_family_from_name(value);
    else if (key == "seed") {
        seed = static_cast<std::uint64_t>(std::stoull(value));
        train.seed = seed;
    } else {
        throw ParameterError("config: unknown key '" + key + "'");
    }
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream f(path);
    if (!f) throw FormatError("config: cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // Trim.
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config: expected key=value at line " + std::to_string(line_no));
        }
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        base.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    return base;
}

} // namespace gaitkit
