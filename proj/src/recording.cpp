#include "gaitkit/recording.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gaitkit/errors.hpp"

namespace gaitkit {

namespace {

constexpr const char* kMagic = "#gaitkit-rec v1";

void check_stream(const std::vector<ImuSample>& s, const char* name) {
    if (s.empty()) throw ValidationError(std::string("recording: empty ") + name + " stream");
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i].t > s[i - 1].t)) {
            throw ValidationError(std::string("recording: non-monotone timestamps in ") + name +
                                  " stream at sample " + std::to_string(i));
        }
    }
    if (s.size() >= 2) {
        const double rate = static_cast<double>(s.size() - 1) / (s.back().t - s.front().t);
        if (rate < 50.0 || rate > 500.0) {
            throw ValidationError(std::string("recording: average ") + name + " rate " +
                                  std::to_string(rate) + " Hz outside [50, 500]");
        }
    }
}

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + field.size() && field.size() > 0 && std::isfinite(out);
}

} // namespace

void Recording::validate() const {
    check_stream(accel, "accelerometer");
    check_stream(gyro, "gyroscope");
}

Recording parse_recording(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("recording: empty input");
    if (line.rfind(kMagic, 0) != 0) {
        throw FormatError("recording: bad header, expected '" + std::string(kMagic) + " ...'");
    }

    Recording rec;
    {
        std::istringstream hs(line.substr(std::string(kMagic).size()));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("subject=", 0) == 0) rec.subject_id = tok.substr(8);
            else if (tok.rfind("session=", 0) == 0) rec.session_id = tok.substr(8);
            else throw FormatError("recording: unknown header field '" + tok + "'");
        }
    }
    if (rec.subject_id.empty() || rec.session_id.empty()) {
        throw FormatError("recording: header must carry subject= and session=");
    }

    std::size_t line_no = 0; // data lines only
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string, 5> fields;
        std::size_t field_count = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (field_count >= 5) {
                    throw ParseError("recording: too many fields at line " + std::to_string(line_no));
                }
                fields[field_count++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (field_count != 5) {
            throw ParseError("recording: expected 5 fields at line " + std::to_string(line_no));
        }
        if (fields[0] != "A" && fields[0] != "G") {
            throw ParseError("recording: unknown sensor tag '" + fields[0] + "' at line " +
                             std::to_string(line_no));
        }
        ImuSample s;
        if (!parse_double(fields[1], s.t) || !parse_double(fields[2], s.x) ||
            !parse_double(fields[3], s.y) || !parse_double(fields[4], s.z)) {
            throw ParseError("recording: malformed numeric field at line " + std::to_string(line_no));
        }
        (fields[0] == "A" ? rec.accel : rec.gyro).push_back(s);
    }

    rec.validate();

    const double t0 = std::min(rec.accel.front().t, rec.gyro.front().t);
    for (auto& s : rec.accel) s.t -= t0;
    for (auto& s : rec.gyro) s.t -= t0;
    return rec;
}

void write_recording(std::ostream& out, const Recording& rec) {
    rec.validate();
    out << kMagic << " subject=" << rec.subject_id << " session=" << rec.session_id << "\n";
    char buf[160];
    auto emit = [&](char tag, const ImuSample& s) {
        std::snprintf(buf, sizeof(buf), "%c,%.9f,%.9g,%.9g,%.9g\n", tag, s.t, s.x, s.y, s.z);
        out << buf;
    };
    for (const auto& s : rec.accel) emit('A', s);
    for (const auto& s : rec.gyro) emit('G', s);
}

Recording load_recording(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("recording: cannot open " + path);
    return parse_recording(f);
}

void save_recording(const std::string& path, const Recording& rec) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("recording: cannot write " + path);
    write_recording(f, rec);
}

} // namespace gaitkit
