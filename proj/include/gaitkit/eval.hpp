#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gaitkit/config.hpp"
#include "gaitkit/normalize.hpp"

namespace gaitkit {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);
void save_csv(const std::string& path, const CsvTable& table);

// Deterministic synthetic cycle corpus: subjects labeled by position in
// `subject_seeds`, each contributing `sessions` walks of `session_s` seconds,
// optionally under per-session random device rotations.
std::vector<CycleMatrix> synth_cycle_dataset(const PipelineConfig& cfg,
                                             const std::vector<std::uint64_t>& subject_seeds,
                                             int sessions, double session_s,
                                             bool random_rotations);

// Desk-scale replications of the reference experiments. Every protocol is
// deterministic in cfg.seed and returns one CSV table.
CsvTable eval_nc_sweep(const PipelineConfig& cfg, const std::vector<int>& nc_values);
CsvTable eval_f_sweep(const PipelineConfig& cfg, const std::vector<int>& f_values);
CsvTable eval_gyro_ablation(const PipelineConfig& cfg);
CsvTable eval_nu_gamma_grid(const PipelineConfig& cfg, const std::vector<double>& gammas,
                            const std::vector<double>& nus);
CsvTable eval_s_sweep(const PipelineConfig& cfg, const std::vector<int>& s_values);
CsvTable eval_enroll_sweep(const PipelineConfig& cfg, const std::vector<int>& cycle_counts);
CsvTable eval_sprt_curves(const PipelineConfig& cfg, const std::vector<double>& error_rates);

// Named dispatch used by the CLI `eval` command.
CsvTable run_eval_protocol(const std::string& name, const PipelineConfig& cfg);
std::vector<std::string> eval_protocol_names();

} // namespace gaitkit
