#include "bhsim/artifacts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bhsim/dataset_io.hpp"
#include "bhsim/metrics.hpp"

namespace fs = std::filesystem;

namespace bhsim {

namespace {

constexpr const char* kVersion = "bhsim 1.0";
constexpr double kZeroOneEpsilon = 0.03;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write artifact: " + path.string());
  return out;
}

std::string lb_tag(int lookback) { return "lb" + std::to_string(lookback); }

void write_events(const fs::path& path, const EpisodeResult& res) {
  std::ofstream out = open_out(path);
  out << "frame,crnti,source,target,origin,intra_bs,outcome\n";
  for (const HandoffEvent& e : res.events) {
    out << e.frame << ',' << e.crnti << ',' << e.source.value << ',' << e.target.value << ','
        << to_string(e.origin) << ',' << (e.intra_bs ? 1 : 0) << ',' << to_string(e.outcome)
        << '\n';
  }
}

void write_history(const fs::path& path, const EpisodeResult& res) {
  std::ofstream out = open_out(path);
  out << "scope,epoch,train_loss_bits,train_accuracy,val_loss_bits,val_accuracy\n";
  for (const ScopeResult& s : res.scopes) {
    if (!s.trained) continue;
    const nn::TrainHistory& h = s.history;
    for (std::size_t e = 0; e < h.train_loss_bits.size(); ++e) {
      out << s.key.str() << ',' << e << ',' << format_double(h.train_loss_bits[e]) << ','
          << format_double(h.train_accuracy[e]) << ',' << format_double(h.val_loss_bits[e]) << ','
          << format_double(h.val_accuracy[e]) << '\n';
    }
  }
}

void write_columns(const fs::path& path, const EpisodeResult& res) {
  std::ofstream out = open_out(path);
  for (const std::string& c : res.feature_columns) out << c << '\n';
}

void write_coherence(const fs::path& path, const std::vector<double>& samples) {
  metrics::EmpiricalCdf cdf(samples);
  std::ofstream out = open_out(path);
  out << "coherence_s,cdf\n";
  for (const auto& step : cdf.table())
    out << format_double(step.value) << ',' << format_double(step.cumulative) << '\n';
}

struct AccuracyRow {
  int lookback;
  long samples;
  double accuracy;
};

std::map<std::string, std::vector<AccuracyRow>> read_accuracy_tables(const fs::path& dir) {
  std::map<std::string, std::vector<AccuracyRow>> tables;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("accuracy_", 0) == 0 && name.rfind("accuracy_scopes_", 0) != 0 &&
        entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    std::string mode = file.stem().string().substr(std::string("accuracy_").size());
    std::ifstream in(file);
    if (!in) throw IoError("cannot read artifact: " + file.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string lb, n, acc;
      std::getline(ss, lb, ',');
      std::getline(ss, n, ',');
      std::getline(ss, acc, ',');
      tables[mode].push_back({std::stoi(lb), std::stol(n), std::stod(acc)});
    }
  }
  return tables;
}

}  // namespace

void write_report(const std::string& run_dir) {
  fs::path dir(run_dir);
  if (!fs::is_directory(dir)) throw IoError("run directory not found: " + run_dir);
  auto tables = read_accuracy_tables(dir);
  if (tables.empty()) throw IoError("no accuracy tables in: " + run_dir);

  std::ofstream out = open_out(dir / "summary.txt");
  out << "run summary (" << kVersion << ")\n\n";

  for (const auto& [mode, rows] : tables) {
    const AccuracyRow* best = &rows.front();
    double mean = 0.0;
    for (const AccuracyRow& r : rows) {
      if (r.accuracy > best->accuracy) best = &r;
      mean += r.accuracy;
    }
    mean /= static_cast<double>(rows.size());
    out << "mode " << mode << ": best lookback " << best->lookback << " (accuracy "
        << format_double(best->accuracy) << ", rlf rate " << format_double(1.0 - best->accuracy)
        << "), mean accuracy over lookbacks " << format_double(mean) << "\n";
  }

  const std::string baseline = "distributed_no_coords";
  auto base_it = tables.find(baseline);
  if (base_it != tables.end()) {
    out << "\nzero-one score vs " << baseline << " (epsilon " << kZeroOneEpsilon << "):\n";
    for (const auto& [mode, rows] : tables) {
      if (mode == baseline) continue;
      std::vector<double> s_hat, s_base;
      std::vector<int> lbs;
      for (const AccuracyRow& r : rows) {
        for (const AccuracyRow& b : base_it->second) {
          if (b.lookback == r.lookback) {
            s_hat.push_back(r.accuracy);
            s_base.push_back(b.accuracy);
            lbs.push_back(r.lookback);
          }
        }
      }
      if (s_hat.empty()) continue;
      metrics::ZeroOneVector z = metrics::zero_one(s_hat, s_base, kZeroOneEpsilon);
      out << "  " << mode << " over lookbacks ";
      for (std::size_t i = 0; i < lbs.size(); ++i) out << (i ? "," : "") << lbs[i];
      out << ": ";
      for (std::size_t i = 0; i < z.entries.size(); ++i) out << (i ? "," : "") << z.entries[i];
      out << "\n";
    }
  } else {
    out << "\nzero-one comparison skipped: no " << baseline << " accuracy table present\n";
  }
}

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  {
    std::ofstream out = open_out(dir / "manifest.txt");
    out << "# " << kVersion << "\n# preset: " << cfg.preset_name << "\n\n" << render_config(cfg);
  }

  const std::string mode_name = to_string(cfg.mode);
  std::ofstream pooled = open_out(dir / ("accuracy_" + mode_name + ".csv"));
  pooled << "lookback,samples,accuracy,rlf_rate\n";
  std::ofstream scopes_out = open_out(dir / ("accuracy_scopes_" + mode_name + ".csv"));
  scopes_out << "lookback,scope,samples,accuracy,rlf_rate\n";
  std::ofstream spread = open_out(dir / ("spread_" + mode_name + ".csv"));
  spread << "lookback,min,mean,max,scopes\n";

  bool coherence_written = false;
  for (int lb : cfg.lookbacks) {
    EpisodeResult res = run_episode(cfg.engine, cfg.mode, lb);

    write_events(dir / ("events_" + mode_name + "_" + lb_tag(lb) + ".csv"), res);
    write_history(dir / ("history_" + mode_name + "_" + lb_tag(lb) + ".csv"), res);
    write_columns(dir / ("columns_" + mode_name + "_" + lb_tag(lb) + ".txt"), res);
    if (!coherence_written) {
      write_coherence(dir / "coherence.csv", res.coherence_samples_s);
      coherence_written = true;
    }

    double acc = res.pooled_accuracy();
    pooled << lb << ',' << res.pooled_samples() << ',' << format_double(acc) << ','
           << format_double(1.0 - acc) << '\n';

    std::vector<metrics::AccuracyReport> reports;
    for (const ScopeResult& s : res.scopes) {
      if (s.samples() == 0) continue;
      scopes_out << lb << ',' << s.key.str() << ',' << s.samples() << ','
                 << format_double(s.accuracy()) << ',' << format_double(1.0 - s.accuracy())
                 << '\n';
      metrics::AccuracyReport r;
      r.scope = s.key.str();
      r.lookback = lb;
      r.accuracy = s.accuracy();
      r.sample_count = s.samples();
      reports.push_back(r);
    }
    if (!reports.empty()) {
      auto agg = metrics::aggregate_by_lookback(reports);
      const metrics::LookbackAggregate& a = agg.at(lb);
      spread << lb << ',' << format_double(a.min) << ',' << format_double(a.mean) << ','
             << format_double(a.max) << ',' << a.scope_count << '\n';
    }
  }
  pooled.close();
  scopes_out.close();
  spread.close();

  write_report(cfg.output_dir);
}

void export_dataset_for(const ExperimentConfig& cfg, const std::string& path) {
  cfg.validate();
  // The perfect-predictor override skips training; the exported rows come from
  // the legacy pass and do not depend on mode or lookback.
  EpisodeResult res = run_episode(cfg.engine, cfg.mode, 0, PredictorOverride::Perfect);
  export_dataset(res.rows, path);
}

}  // namespace bhsim
