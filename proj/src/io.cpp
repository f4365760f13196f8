#include "membrane/io.hpp"

#include <cstdio>
#include <filesystem>

namespace membrane {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << "\n";
}

void write_region_csv(const std::string& path, const Region& r) {
  CsvWriter csv(path);
  std::vector<std::string> header;
  for (int i = 0; i < r.dim(); ++i) header.push_back("x" + std::to_string(i + 1));
  csv.row(header);
  for (const auto& p : r) {
    std::vector<std::string> cells;
    for (int i = 0; i < r.dim(); ++i) cells.push_back(std::to_string(p.c[i]));
    csv.row(cells);
  }
}

Region read_region_csv(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_region_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Point p = Point::zero(d);
    size_t pos = 0;
    for (int i = 0; i < d; ++i) {
      const size_t comma = line.find(',', pos);
      p.c[i] = std::stoi(line.substr(pos, comma - pos));
      pos = comma == std::string::npos ? line.size() : comma + 1;
    }
    pts.push_back(p);
  }
  return Region(d, std::move(pts));
}

void write_matrix_coo_csv(const std::string& path, const Eigen::SparseMatrix<double>& m) {
  CsvWriter csv(path);
  csv.row({"row", "col", "value"});
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      csv.row({std::to_string(it.row()), std::to_string(it.col()), format_double(it.value())});
}

void write_column_csv(const std::string& path, const LatticeField& f) {
  CsvWriter csv(path);
  std::vector<std::string> header;
  for (int i = 0; i < f.dim(); ++i) header.push_back("x" + std::to_string(i + 1));
  header.push_back("value");
  csv.row(header);
  for (int i = 0; i < f.support().size(); ++i) {
    std::vector<std::string> cells;
    for (int k = 0; k < f.dim(); ++k) cells.push_back(std::to_string(f.support().site(i).c[k]));
    cells.push_back(format_double(f.values()[i]));
    csv.row(cells);
  }
}

void write_profile_csv(const std::string& path, const DecayProfile& p) {
  CsvWriter csv(path);
  csv.row({"k", "cov", "stderr", "baseline", "n_samples"});
  for (const auto& row : p.rows)
    csv.row({std::to_string(row.k), format_double(row.cov), format_double(row.se),
             format_double(row.baseline), std::to_string(row.n)});
}

void write_ensemble_summary_csv(const std::string& path, const PinnedEnsemble& e) {
  CsvWriter csv(path);
  csv.row({"sample", "pinned", "density"});
  for (int i = 0; i < e.n_samples(); ++i) {
    const int c = e.pinned_count(i);
    csv.row({std::to_string(i), std::to_string(c),
             format_double(static_cast<double>(c) / e.samples[i].size())});
  }
}

nlohmann::json certificate_to_json(const DecayCertificate& c) {
  nlohmann::json j;
  std::vector<int> center(c.center.c.begin(), c.center.c.begin() + c.center.dim);
  j["center"] = center;
  j["shells"] = c.shells;
  j["norms"] = c.shell_norms;
  j["contraction5"] = c.contraction5;
  j["worst_contraction"] = c.worst_contraction;
  j["s_fit"] = c.s_fit;
  j["degenerate"] = c.degenerate;
  if (c.M) j["M"] = *c.M;
  else j["M"] = nullptr;
  j["c_equiv"] = c.c_equiv;
  j["theoretical_ratio"] = c.theoretical_ratio;
  return j;
}

nlohmann::json adaptive_report_to_json(const AdaptiveBoundReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["xi"] = r.xi;
  j["m_k"] = r.m_k;
  nlohmann::json ml = nlohmann::json::array();
  for (const auto& m : r.M_l) {
    if (m) ml.push_back(*m);
    else ml.push_back(nullptr);
  }
  j["M_l"] = ml;
  j["a_k"] = r.a_k;
  j["gamma"] = r.gamma_value;
  j["c"] = r.c_used;
  j["bound"] = r.bound;
  if (r.measured) j["measured"] = *r.measured;
  return j;
}

nlohmann::json stretched_fit_to_json(const StretchedFit& f) {
  nlohmann::json j;
  j["alpha"] = f.alpha;
  j["amplitude"] = f.amplitude;
  j["residual"] = f.residual;
  j["power_exponent"] = f.power_exponent;
  j["power_residual"] = f.power_residual;
  j["not_stretched"] = f.not_stretched;
  j["k_range"] = {f.k_min, f.k_max};
  j["excluded_points"] = f.excluded;
  j["used_points"] = f.used;
  return j;
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fnv1a_file: cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

RunManifest::RunManifest(std::string out_dir, nlohmann::json config_echo)
    : out_dir_(std::move(out_dir)) {
  j_["artifact_version"] = "0.1.0";
  j_["config"] = std::move(config_echo);
  j_["constants"] = nlohmann::json::object();
  j_["timings_seconds"] = nlohmann::json::object();
  j_["outputs"] = nlohmann::json::object();
}

void RunManifest::add_constant(const std::string& name, double value) {
  j_["constants"][name] = value;
}

void RunManifest::add_timing(const std::string& name, double seconds) {
  j_["timings_seconds"][name] = seconds;
}

void RunManifest::add_entry(const std::string& name, const nlohmann::json& value) {
  j_[name] = value;
}

void RunManifest::add_output(const std::string& path) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a_file(path)));
  j_["outputs"][std::filesystem::path(path).filename().string()] = std::string(buf);
  outputs_.push_back(path);
}

void RunManifest::write() const {
  const std::string final_path = out_dir_ + "/manifest.json";
  const std::string tmp = final_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j_.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, final_path);
}

}  // namespace membrane
