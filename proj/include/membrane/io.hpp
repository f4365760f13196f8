#pragma once

#include <Eigen/Sparse>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "membrane/decay.hpp"
#include "membrane/field.hpp"
#include "membrane/sobolev.hpp"

namespace membrane {

// Shortest round-trip decimal form; fixed across runs for byte-identical
// outputs (criterion: same seed => same bytes).
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void row(const std::vector<std::string>& cells);
  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

void write_region_csv(const std::string& path, const Region& r);
Region read_region_csv(const std::string& path, int d);
void write_matrix_coo_csv(const std::string& path, const Eigen::SparseMatrix<double>& m);
void write_column_csv(const std::string& path, const LatticeField& f);
void write_profile_csv(const std::string& path, const DecayProfile& p);
void write_ensemble_summary_csv(const std::string& path, const PinnedEnsemble& e);

nlohmann::json certificate_to_json(const DecayCertificate& c);
nlohmann::json adaptive_report_to_json(const AdaptiveBoundReport& r);
nlohmann::json stretched_fit_to_json(const StretchedFit& f);

uint64_t fnv1a_file(const std::string& path);

// Run manifest: config echo, artifact version, measured constants, timings,
// and content hashes of every produced file. Written atomically at run end.
class RunManifest {
 public:
  RunManifest(std::string out_dir, nlohmann::json config_echo);
  void add_constant(const std::string& name, double value);
  void add_timing(const std::string& name, double seconds);
  void add_entry(const std::string& name, const nlohmann::json& value);
  // Register a produced file (must exist; records its content hash).
  void add_output(const std::string& path);
  void write() const;  // <out_dir>/manifest.json
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  std::string out_dir_;
  nlohmann::json j_;
  std::vector<std::string> outputs_;
};

}  // namespace membrane
