#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gaitkit {

struct ImuSample {
    double t = 0.0; // seconds
    double x = 0.0, y = 0.0, z = 0.0;
};

// One walking session: raw, irregularly timestamped accelerometer (m/s^2)
// and gyroscope (rad/s) streams.
struct Recording {
    std::string subject_id;
    std::string session_id;
    std::vector<ImuSample> accel;
    std::vector<ImuSample> gyro;

    // Throws ValidationError unless both streams are non-empty, strictly
    // increasing in time, and (when measurable) average 50..500 Hz.
    void validate() const;
};

// Text format, one sample per line:
//   #gaitkit-rec v1 subject=<id> session=<id>
//   S,t,x,y,z        with S in {A,G}, t in seconds
// Parse errors name the offending data line (header excluded).
// Timestamps are normalized so the earlier of the two streams starts at 0.
Recording parse_recording(std::istream& in);
void write_recording(std::ostream& out, const Recording& rec);

Recording load_recording(const std::string& path);
void save_recording(const std::string& path, const Recording& rec);

} // namespace gaitkit
