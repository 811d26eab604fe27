#include "gaitkit/store.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "gaitkit/errors.hpp"

namespace gaitkit {

namespace {

constexpr const char* kCycMagic = "#gaitkit-cyc v1";
constexpr const char* kCnnMagic = "#gaitkit-cnn v1";
constexpr const char* kOsvmMagic = "#gaitkit-osvm v1";
constexpr const char* kAuthMagic = "#gaitkit-auth v1";

std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next(const char* what) {
        std::string line;
        if (!std::getline(in_, line)) {
            throw FormatError(std::string("container: unexpected end of file, expected ") + what);
        }
        ++line_no_;
        return line;
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

void expect_magic(LineReader& r, const char* magic) {
    const std::string line = r.next("magic header");
    if (line == magic) return;
    if (line.rfind("#gaitkit-", 0) == 0) {
        throw FormatError("container: unsupported magic/version '" + line + "', expected '" +
                          std::string(magic) + "'");
    }
    throw FormatError(std::string("container: missing magic header '") + magic + "'");
}

// One "keyword key=value key=value ..." line.
class FieldMap {
public:
    FieldMap(const std::string& line, const std::string& keyword) : keyword_(keyword) {
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head != keyword) {
            throw FormatError("container: expected '" + keyword + "' line, got '" + line + "'");
        }
        std::string tok;
        while (ss >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) {
                throw FormatError("container: malformed field '" + tok + "' in '" + keyword +
                                  "' line");
            }
            fields_.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
        }
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : fields_) {
            if (k == key) return v;
        }
        throw FormatError("container: '" + keyword_ + "' line missing field '" + key + "'");
    }
    double get_double(const std::string& key) const {
        return std::strtod(get(key).c_str(), nullptr);
    }
    int get_int(const std::string& key) const { return std::stoi(get(key)); }
    std::uint64_t get_u64(const std::string& key) const { return std::stoull(get(key)); }

private:
    std::vector<std::pair<std::string, std::string>> fields_;
    std::string keyword_;
};

void write_array(std::ostream& out, const char* name, const std::vector<double>& v) {
    out << "array " << name << " " << v.size() << "\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << g9(v[i]);
        out << (((i + 1) % 8 == 0 || i + 1 == v.size()) ? "\n" : " ");
    }
}

std::vector<double> read_array(LineReader& r, const std::string& name) {
    std::istringstream header(r.next("array header"));
    std::string kw, got_name;
    std::size_t count = 0;
    header >> kw >> got_name >> count;
    if (kw != "array" || got_name != name) {
        throw FormatError("container: expected 'array " + name + " <count>'");
    }
    std::vector<double> v;
    v.reserve(count);
    while (v.size() < count) {
        std::istringstream vals(r.next("array values"));
        std::string tok;
        while (vals >> tok) {
            if (v.size() >= count) throw FormatError("container: too many values in array " + name);
            char* end = nullptr;
            const double x = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size()) {
                throw FormatError("container: bad numeric '" + tok + "' in array " + name);
            }
            v.push_back(x);
        }
    }
    return v;
}

void write_row(std::ostream& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        out << g9(row[i]) << (i + 1 == row.size() ? "\n" : " ");
    }
}

std::vector<double> read_row(LineReader& r, std::size_t count) {
    std::istringstream vals(r.next("matrix row"));
    std::vector<double> row;
    row.reserve(count);
    std::string tok;
    while (vals >> tok) {
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) {
            throw FormatError("container: bad numeric '" + tok + "' in matrix row");
        }
        row.push_back(x);
    }
    if (row.size() != count) {
        throw FormatError("container: matrix row has " + std::to_string(row.size()) +
                          " values, expected " + std::to_string(count));
    }
    return row;
}

// ---- cnn body --------------------------------------------------------------

void write_cnn_body(std::ostream& out, const CnnModel& model) {
    const auto& a = model.arch;
    out << "arch rows=" << a.input_rows << " cols=" << a.input_cols << " q1=" << a.cl1_kernels
        << " q2=" << a.cl2_kernels << " k1=" << a.cl1_klen << " k2r=" << a.cl2_krows
        << " k2l=" << a.cl2_klen << " pool=" << a.pool_width << " features=" << a.features
        << " classes=" << a.classes << "\n";
    out << "meta seed=" << model.meta.seed << " epochs=" << model.meta.epochs_run
        << " best_val_loss=" << g9(model.meta.best_val_loss)
        << " final_train_loss=" << g9(model.meta.final_train_loss)
        << " test_accuracy=" << g9(model.meta.test_accuracy) << "\n";
    write_array(out, "cl1_w", model.cl1_w);
    write_array(out, "cl1_b", model.cl1_b);
    write_array(out, "cl2_w", model.cl2_w);
    write_array(out, "cl2_b", model.cl2_b);
    write_array(out, "fl1_w", model.fl1_w);
    write_array(out, "fl1_b", model.fl1_b);
    write_array(out, "fl2_w", model.fl2_w);
    write_array(out, "fl2_b", model.fl2_b);
}

CnnModel read_cnn_body(LineReader& r) {
    CnnModel model;
    const FieldMap arch(r.next("arch line"), "arch");
    model.arch.input_rows = arch.get_int("rows");
    model.arch.input_cols = arch.get_int("cols");
    model.arch.cl1_kernels = arch.get_int("q1");
    model.arch.cl2_kernels = arch.get_int("q2");
    model.arch.cl1_klen = arch.get_int("k1");
    model.arch.cl2_krows = arch.get_int("k2r");
    model.arch.cl2_klen = arch.get_int("k2l");
    model.arch.pool_width = arch.get_int("pool");
    model.arch.features = arch.get_int("features");
    model.arch.classes = arch.get_int("classes");

    const FieldMap meta(r.next("meta line"), "meta");
    model.meta.seed = meta.get_u64("seed");
    model.meta.epochs_run = meta.get_int("epochs");
    model.meta.best_val_loss = meta.get_double("best_val_loss");
    model.meta.final_train_loss = meta.get_double("final_train_loss");
    model.meta.test_accuracy = meta.get_double("test_accuracy");

    model.cl1_w = read_array(r, "cl1_w");
    model.cl1_b = read_array(r, "cl1_b");
    model.cl2_w = read_array(r, "cl2_w");
    model.cl2_b = read_array(r, "cl2_b");
    model.fl1_w = read_array(r, "fl1_w");
    model.fl1_b = read_array(r, "fl1_b");
    model.fl2_w = read_array(r, "fl2_w");
    model.fl2_b = read_array(r, "fl2_b");
    model.validate_shapes();
    return model;
}

// ---- osvm body -------------------------------------------------------------

void write_osvm_body(std::ostream& out, const OsvmModel& model) {
    const int dim = model.support_vectors.empty()
                        ? model.pca.s_count
                        : static_cast<int>(model.support_vectors.front().size());
    out << "params nu=" << g9(model.nu) << " gamma=" << g9(model.gamma_rbf)
        << " b=" << g9(model.b) << " sv_count=" << model.support_vectors.size()
        << " sv_dim=" << dim << "\n";
    out << "pca s=" << model.pca.s_count << " f=" << model.pca.f_count
        << " mode=" << pca_mode_name(model.pca.mode) << "\n";
    write_array(out, "pca_mean", model.pca.mean);
    write_array(out, "pca_basis", model.pca.basis);
    write_array(out, "pca_variances", model.pca.component_variances);
    write_array(out, "alphas", model.alphas);
    std::vector<double> flat;
    flat.reserve(model.support_vectors.size() * static_cast<std::size_t>(dim));
    for (const auto& sv : model.support_vectors) flat.insert(flat.end(), sv.begin(), sv.end());
    write_array(out, "support_vectors", flat);
}

OsvmModel read_osvm_body(LineReader& r) {
    OsvmModel model;
    const FieldMap params(r.next("params line"), "params");
    model.nu = params.get_double("nu");
    model.gamma_rbf = params.get_double("gamma");
    model.b = params.get_double("b");
    const std::size_t sv_count = static_cast<std::size_t>(params.get_int("sv_count"));
    const std::size_t sv_dim = static_cast<std::size_t>(params.get_int("sv_dim"));

    const FieldMap pca(r.next("pca line"), "pca");
    model.pca.s_count = pca.get_int("s");
    model.pca.f_count = pca.get_int("f");
    model.pca.mode = pca_mode_from_name(pca.get("mode"));
    model.pca.mean = read_array(r, "pca_mean");
    model.pca.basis = read_array(r, "pca_basis");
    model.pca.component_variances = read_array(r, "pca_variances");
    model.alphas = read_array(r, "alphas");
    const auto flat = read_array(r, "support_vectors");

    if (model.alphas.size() != sv_count || flat.size() != sv_count * sv_dim) {
        throw FormatError("container: OSVM support-vector arrays inconsistent with sv_count");
    }
    model.support_vectors.resize(sv_count);
    for (std::size_t i = 0; i < sv_count; ++i) {
        model.support_vectors[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(i * sv_dim),
                                        flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * sv_dim));
    }
    model.validate();
    return model;
}

// ---- score model body ------------------------------------------------------

void write_score_body(std::ostream& out, const ScoreModel& m) {
    out << "model family=" << score_family_name(m.family) << " mu=" << g9(m.mu)
        << " sigma=" << g9(m.sigma) << " bandwidth=" << g9(m.kde_bandwidth) << "\n";
    write_array(out, "kde_points", m.kde_points);
}

ScoreModel read_score_body(LineReader& r) {
    ScoreModel m;
    const FieldMap f(r.next("score model line"), "model");
    m.family = score_family_from_name(f.get("family"));
    m.mu = f.get_double("mu");
    m.sigma = f.get_double("sigma");
    m.kde_bandwidth = f.get_double("bandwidth");
    m.kde_points = read_array(r, "kde_points");
    m.validate();
    return m;
}

void expect_line(LineReader& r, const std::string& want) {
    const std::string got = r.next(want.c_str());
    if (got != want) {
        throw FormatError("container: expected '" + want + "', got '" + got + "'");
    }
}

} // namespace

// ---- cycle dataset ----------------------------------------------------------

void write_cycle_dataset(std::ostream& out, const std::vector<CycleMatrix>& cycles) {
    if (cycles.empty()) throw ValidationError("cycle dataset: nothing to write");
    const int rows = cycles.front().n_rows();
    const int n = cycles.front().n_cols;
    if (rows != 8 && rows != 4) throw ValidationError("cycle dataset: rows must be 8 or 4");
    out << kCycMagic << " rows=" << rows << " n=" << n << "\n";
    for (const auto& c : cycles) {
        if (c.n_rows() != rows || c.n_cols != n) {
            throw ValidationError("cycle dataset: inconsistent cycle shapes");
        }
        out << "cycle subject=";
        if (c.subject_label) out << *c.subject_label;
        else out << "-";
        out << " session=" << (c.session_id.empty() ? "-" : c.session_id) << "\n";
        for (const auto& row : c.rows) write_row(out, row);
    }
}

std::vector<CycleMatrix> read_cycle_dataset(std::istream& in) {
    LineReader r(in);
    const std::string header = r.next("header");
    if (header.rfind(kCycMagic, 0) != 0) {
        if (header.rfind("#gaitkit-", 0) == 0) {
            throw FormatError("cycle dataset: unsupported magic/version '" + header + "'");
        }
        throw FormatError("cycle dataset: bad magic, expected '" + std::string(kCycMagic) + "'");
    }
    std::istringstream hs(header.substr(std::string(kCycMagic).size()));
    int rows = 0, n = 0;
    std::string tok;
    while (hs >> tok) {
        if (tok.rfind("rows=", 0) == 0) rows = std::stoi(tok.substr(5));
        else if (tok.rfind("n=", 0) == 0) n = std::stoi(tok.substr(2));
        else throw FormatError("cycle dataset: unknown header field '" + tok + "'");
    }
    if ((rows != 8 && rows != 4) || n < 2) {
        throw FormatError("cycle dataset: invalid rows/n in header");
    }

    std::vector<CycleMatrix> cycles;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const FieldMap rec(line, "cycle");
        CycleMatrix c;
        c.n_cols = n;
        const std::string& subj = rec.get("subject");
        if (subj != "-") c.subject_label = std::stoi(subj);
        const std::string& sess = rec.get("session");
        if (sess != "-") c.session_id = sess;
        for (int row = 0; row < rows; ++row) {
            c.rows.push_back(read_row(r, static_cast<std::size_t>(n)));
        }
        cycles.push_back(std::move(c));
    }
    if (cycles.empty()) throw FormatError("cycle dataset: no cycles");
    return cycles;
}

// ---- cnn --------------------------------------------------------------------

void write_cnn_model(std::ostream& out, const CnnModel& model) {
    model.validate_shapes();
    out << kCnnMagic << "\n";
    write_cnn_body(out, model);
}

CnnModel read_cnn_model(std::istream& in) {
    LineReader r(in);
    expect_magic(r, kCnnMagic);
    return read_cnn_body(r);
}

// ---- osvm ---------------------------------------------------------------------

void write_osvm_model(std::ostream& out, const OsvmModel& model) {
    model.validate();
    out << kOsvmMagic << "\n";
    write_osvm_body(out, model);
}

OsvmModel read_osvm_model(std::istream& in) {
    LineReader r(in);
    expect_magic(r, kOsvmMagic);
    return read_osvm_body(r);
}

// ---- auth profile -------------------------------------------------------------

void write_auth_profile(std::ostream& out, const AuthProfile& profile) {
    profile.osvm.validate();
    profile.cnn.validate_shapes();
    out << kAuthMagic << "\n";
    out << "section osvm\n";
    write_osvm_body(out, profile.osvm);
    out << "section score_p1\n";
    write_score_body(out, profile.p1);
    out << "section score_p0\n";
    write_score_body(out, profile.p0);
    out << "section sprt\n";
    out << "sprt alpha=" << g9(profile.sprt.alpha_err) << " beta=" << g9(profile.sprt.beta_err)
        << " a=" << g9(profile.sprt.threshold_a) << " b=" << g9(profile.sprt.threshold_b)
        << " max_cycles=" << profile.sprt.max_cycles << "\n";
    out << "section cnn\n";
    write_cnn_body(out, profile.cnn);
}

AuthProfile read_auth_profile(std::istream& in) {
    LineReader r(in);
    expect_magic(r, kAuthMagic);
    AuthProfile profile;
    expect_line(r, "section osvm");
    profile.osvm = read_osvm_body(r);
    expect_line(r, "section score_p1");
    profile.p1 = read_score_body(r);
    expect_line(r, "section score_p0");
    profile.p0 = read_score_body(r);
    expect_line(r, "section sprt");
    const FieldMap sprt(r.next("sprt line"), "sprt");
    profile.sprt.alpha_err = sprt.get_double("alpha");
    profile.sprt.beta_err = sprt.get_double("beta");
    profile.sprt.threshold_a = sprt.get_double("a");
    profile.sprt.threshold_b = sprt.get_double("b");
    profile.sprt.max_cycles = sprt.get_int("max_cycles");
    expect_line(r, "section cnn");
    profile.cnn = read_cnn_body(r);
    return profile;
}

// ---- path helpers --------------------------------------------------------------

namespace {

template <typename T, typename Reader>
T load_from(const std::string& path, Reader reader, const char* what) {
    std::ifstream f(path);
    if (!f) throw FormatError(std::string(what) + ": cannot open " + path);
    return reader(f);
}

template <typename T, typename Writer>
void save_to(const std::string& path, const T& value, Writer writer, const char* what) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError(std::string(what) + ": cannot write " + path);
    writer(f, value);
}

} // namespace

void save_cycle_dataset(const std::string& path, const std::vector<CycleMatrix>& cycles) {
    save_to(path, cycles, [](std::ostream& o, const std::vector<CycleMatrix>& v) {
        write_cycle_dataset(o, v);
    }, "cycle dataset");
}
std::vector<CycleMatrix> load_cycle_dataset(const std::string& path) {
    return load_from<std::vector<CycleMatrix>>(path, [](std::istream& i) {
        return read_cycle_dataset(i);
    }, "cycle dataset");
}

void save_cnn_model(const std::string& path, const CnnModel& model) {
    save_to(path, model, [](std::ostream& o, const CnnModel& m) { write_cnn_model(o, m); },
            "cnn model");
}
CnnModel load_cnn_model(const std::string& path) {
    return load_from<CnnModel>(path, [](std::istream& i) { return read_cnn_model(i); },
                               "cnn model");
}

void save_osvm_model(const std::string& path, const OsvmModel& model) {
    save_to(path, model, [](std::ostream& o, const OsvmModel& m) { write_osvm_model(o, m); },
            "osvm model");
}
OsvmModel load_osvm_model(const std::string& path) {
    return load_from<OsvmModel>(path, [](std::istream& i) { return read_osvm_model(i); },
                                "osvm model");
}

void save_auth_profile(const std::string& path, const AuthProfile& profile) {
    save_to(path, profile, [](std::ostream& o, const AuthProfile& p) { write_auth_profile(o, p); },
            "auth profile");
}
AuthProfile load_auth_profile(const std::string& path) {
    return load_from<AuthProfile>(path, [](std::istream& i) { return read_auth_profile(i); },
                                  "auth profile");
}

} // namespace gaitkit
