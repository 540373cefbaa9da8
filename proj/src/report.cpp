#include "oodknn/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oodknn/error.hpp"

namespace oodknn {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

EvalReport evaluate(const ScoreVector& id, const ScoreVector& ood, double tpr_level) {
  const auto threshold = calibrate(id.scores, tpr_level);
  EvalReport r;
  r.id_dataset = id.dataset;
  r.ood_dataset = ood.dataset;
  r.method = id.config;
  r.tpr_level = tpr_level;
  r.fpr_at_tpr95 = fpr_at_tpr(id.scores, ood.scores, tpr_level);
  r.auroc = auroc(id.scores, ood.scores);
  r.n_id = id.scores.size();
  r.n_ood = ood.scores.size();
  r.gamma = threshold.gamma;
  return r;
}

EvalReport unweighted_mean(std::span<const EvalReport> reports) {
  if (reports.empty()) fail(ErrorKind::Input, "no reports to average");
  EvalReport mean = reports.front();
  mean.ood_dataset = std::string(kMeanRowName);
  mean.fpr_at_tpr95 = 0.0;
  mean.auroc = 0.0;
  mean.n_ood = 0;
  for (const auto& r : reports) {
    mean.fpr_at_tpr95 += r.fpr_at_tpr95;
    mean.auroc += r.auroc;
    mean.n_ood += r.n_ood;
  }
  mean.fpr_at_tpr95 /= static_cast<double>(reports.size());
  mean.auroc /= static_cast<double>(reports.size());
  return mean;
}

std::string format_text(std::span<const EvalReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    out += "id_dataset=" + r.id_dataset + " ood_dataset=" + r.ood_dataset + " " +
           r.method.to_inline_string() + " tpr_level=" + format_double(r.tpr_level) +
           " fpr_at_tpr95=" + format_double(r.fpr_at_tpr95) +
           " auroc=" + format_double(r.auroc) + " n_id=" + std::to_string(r.n_id) +
           " n_ood=" + std::to_string(r.n_ood) + " gamma=" + format_double(r.gamma) +
           "\n";
  }
  return out;
}

std::string format_json(std::span<const EvalReport> reports) {
  auto array = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json o;
    o["id_dataset"] = r.id_dataset;
    o["ood_dataset"] = r.ood_dataset;
    o["method"] = r.method.to_inline_string();
    o["tpr_level"] = r.tpr_level;
    o["fpr_at_tpr95"] = r.fpr_at_tpr95;
    o["auroc"] = r.auroc;
    o["n_id"] = r.n_id;
    o["n_ood"] = r.n_ood;
    o["gamma"] = r.gamma;
    array.push_back(std::move(o));
  }
  return array.dump(2) + "\n";
}

std::string format_scores(const ScoreVector& scores, bool with_config) {
  std::string out = "# dataset=" + scores.dataset + "\n";
  std::istringstream config(with_config ? scores.config.to_string() : std::string());
  for (std::string line; std::getline(config, line);) out += "# " + line + "\n";
  for (double s : scores.scores) out += format_double(s) + "\n";
  return out;
}

ScoreFile parse_scores(std::string_view text, std::string_view source) {
  ScoreFile file;
  std::string config_text;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line.remove_prefix(1);
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      if (line.starts_with("dataset=")) {
        file.scores.dataset = std::string(line.substr(8));
      } else if (line.find('=') != std::string_view::npos) {
        config_text += std::string(line) + "\n";
      }
      continue;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
      fail(ErrorKind::Format, std::string(source) + ":" + std::to_string(line_no) +
                                  ": invalid score '" + std::string(line) + "'");
    }
    file.scores.scores.push_back(v);
  }
  if (!config_text.empty()) {
    file.scores.config = ScorerConfig::parse(config_text);
    file.has_config = true;
  }
  if (file.scores.scores.empty()) {
    fail(ErrorKind::Input, std::string(source) + ": score file has no scores");
  }
  return file;
}

void write_scores(const ScoreVector& scores, const std::filesystem::path& path,
                  bool with_config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << format_scores(scores, with_config);
  out.close();
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

ScoreFile read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scores(buffer.str(), path.string());
}

std::string format_histogram(const Histogram& hist) {
  std::string out;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out += format_double(hist.edges[i]) + " " + std::to_string(hist.counts[i]) + "\n";
  }
  return out;
}

}  // namespace oodknn
