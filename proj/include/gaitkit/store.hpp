#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gaitkit/pipeline.hpp"

namespace gaitkit {

// Self-describing text containers. Writers emit a canonical byte stream
// (%.9g numerics, fixed field order), so write -> load -> write is
// byte-identical; loaders reject unknown magics/versions and re-validate
// shape invariants.

// `#gaitkit-cyc v1 rows=<8|4> n=<N>`
void write_cycle_dataset(std::ostream& out, const std::vector<CycleMatrix>& cycles);
std::vector<CycleMatrix> read_cycle_dataset(std::istream& in);
void save_cycle_dataset(const std::string& path, const std::vector<CycleMatrix>& cycles);
std::vector<CycleMatrix> load_cycle_dataset(const std::string& path);

// `#gaitkit-cnn v1`
void write_cnn_model(std::ostream& out, const CnnModel& model);
CnnModel read_cnn_model(std::istream& in);
void save_cnn_model(const std::string& path, const CnnModel& model);
CnnModel load_cnn_model(const std::string& path);

// `#gaitkit-osvm v1`
void write_osvm_model(std::ostream& out, const OsvmModel& model);
OsvmModel read_osvm_model(std::istream& in);
void save_osvm_model(const std::string& path, const OsvmModel& model);
OsvmModel load_osvm_model(const std::string& path);

// `#gaitkit-auth v1`
void write_auth_profile(std::ostream& out, const AuthProfile& profile);
AuthProfile read_auth_profile(std::istream& in);
void save_auth_profile(const std::string& path, const AuthProfile& profile);
AuthProfile load_auth_profile(const std::string& path);

} // namespace gaitkit
