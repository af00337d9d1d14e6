// metrics.hpp - append-only line-delimited metrics records
// {step, <named scalars>, wall_time}. Traces are diagnostics; byte-stable
// artifacts never embed wall time.
#pragma once

#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

namespace viprom::io {

class MetricsWriter {
 public:
  MetricsWriter() = default;
  explicit MetricsWriter(const std::string& path) { open(path); }

  void open(const std::string& path) {
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) throw std::runtime_error("metrics: cannot open " + path);
    start_ = std::chrono::steady_clock::now();
    last_step_ = -1;
  }

  bool is_open() const { return file_.is_open(); }

  void write(std::int64_t step, nlohmann::ordered_json fields) {
    if (!file_.is_open()) return;
    if (step <= last_step_)
      throw std::runtime_error("metrics: non-monotone step " + std::to_string(step));
    last_step_ = step;
    nlohmann::ordered_json rec;
    rec["step"] = step;
    for (auto& [k, v] : fields.items()) rec[k] = v;
    rec["wall_time"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    file_ << rec.dump() << "\n";
    file_.flush();
  }

 private:
  std::ofstream file_;
  std::chrono::steady_clock::time_point start_;
  std::int64_t last_step_ = -1;
};

}  // namespace viprom::io
