// oodknn command-line tool. Talks to the library only through the C API.
//
// Exit codes: 0 success, 2 configuration, 3 I/O or format, 4 shape mismatch.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oodknn/oodknn.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitShape = 4;

int exit_code(ood_status status) {
  switch (status) {
    case OOD_OK: return 0;
    case OOD_ERR_CONFIG:
    case OOD_ERR_INPUT: return kExitConfig;
    case OOD_ERR_IO:
    case OOD_ERR_FORMAT:
    case OOD_ERR_CORRUPT:
    case OOD_ERR_VALIDATION: return kExitIo;
    case OOD_ERR_SHAPE: return kExitShape;
    case OOD_ERR_INTERNAL: return 1;
  }
  return 1;
}

struct Failure {
  int code;
};

void check(ood_status status) {
  if (status == OOD_OK) return;
  std::cerr << "oodknn: " << ood_status_name(status) << " error: " << ood_last_error()
            << "\n";
  throw Failure{exit_code(status)};
}

[[noreturn]] void die(int code, const std::string& message) {
  std::cerr << "oodknn: " << message << "\n";
  throw Failure{code};
}

// RAII for C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using MatrixHandle = Handle<ood_matrix, ood_matrix_free>;
using ManifestHandle = Handle<ood_manifest, ood_manifest_free>;
using ScorerHandle = Handle<ood_scorer, ood_scorer_free>;
using ScoresHandle = Handle<ood_scores, ood_scores_free>;
using EvalHandle = Handle<ood_eval, ood_eval_free>;

struct MethodFlags {
  std::string method = "knn";
  std::optional<std::uint64_t> k;
  std::optional<std::uint64_t> n_components;
  std::optional<std::uint64_t> n_estimators;
  std::optional<std::uint64_t> subsample;
  std::optional<std::uint64_t> n_bins;
  std::optional<std::uint64_t> n_projections;
  std::uint64_t seed = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--method", method, "knn, msp, lof, pca, iforest or loda")
        ->capture_default_str();
    cmd.add_option("--k", k, "neighbor count (knn default 5, lof default 20)");
    cmd.add_option("--n-components", n_components, "pca components (default 128)");
    cmd.add_option("--n-estimators", n_estimators, "iforest trees (default 100)");
    cmd.add_option("--subsample", subsample, "iforest subsample size (default 256)");
    cmd.add_option("--n-bins", n_bins, "loda histogram bins (default 10)");
    cmd.add_option("--n-projections", n_projections, "loda projections (default 100)");
    cmd.add_option("--seed", seed, "seed for iforest and loda")->capture_default_str();
  }

  ood_scorer_config resolve() const {
    ood_method m{};
    check(ood_method_from_name(method.c_str(), &m));
    ood_scorer_config c{};
    check(ood_config_default(m, &c));
    if (k) c.k = *k;
    if (n_components) c.n_components = *n_components;
    if (n_estimators) c.n_estimators = *n_estimators;
    if (subsample) c.subsample = *subsample;
    if (n_bins) c.n_bins = *n_bins;
    if (n_projections) c.n_projections = *n_projections;
    c.seed = seed;
    return c;
  }
};

void write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) die(kExitIo, "cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) die(kExitIo, "write failed for " + path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) die(kExitIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                      c == '.';
    out += keep ? c : '_';
  }
  return out.empty() ? "dataset" : out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmd_fit(const std::string& manifest_path, const MethodFlags& flags,
            const std::string& out_dir) {
  const auto config = flags.resolve();
  ManifestHandle manifest;
  check(ood_manifest_load(manifest_path.c_str(), manifest.out()));
  check(ood_model_fit_manifest(manifest.get(), &config, out_dir.c_str()));
  std::cerr << "oodknn: fitted " << flags.method << " model in " << out_dir << "\n";
  return 0;
}

int cmd_score(const std::string& model_dir, const std::string& input, std::string name,
              bool csv_logits, unsigned workers, const std::string& out) {
  ScorerHandle scorer;
  check(ood_model_load(model_dir.c_str(), scorer.out()));
  MatrixHandle data;
  check(ood_matrix_read(input.c_str(), csv_logits ? OOD_LOGITS : OOD_EMBEDDINGS, data.out()));
  if (name.empty()) name = fs::path(input).stem().string();
  ScoresHandle scores;
  check(ood_scorer_score(scorer.get(), data.get(), name.c_str(), 1, workers, scores.out()));
  write_text(ood_scores_text(scores.get()), out);
  return 0;
}

int cmd_calibrate(const std::string& scores_path, double tpr, const std::string& out) {
  ScoresHandle scores;
  check(ood_scores_read(scores_path.c_str(), scores.out()));
  ood_threshold t{};
  check(ood_calibrate(ood_scores_data(scores.get()), ood_scores_size(scores.get()), tpr, &t));
  write_text("gamma=" + format_number(t.gamma) + "\ntpr_level=" + format_number(t.tpr_level) +
                 "\nn_id=" + std::to_string(t.n_id) + "\n",
             out);
  return 0;
}

int cmd_eval(const std::string& manifest_path, const MethodFlags& flags, double tpr,
             unsigned workers, const std::string& out_dir) {
  const auto config = flags.resolve();
  ManifestHandle manifest;
  check(ood_manifest_load(manifest_path.c_str(), manifest.out()));
  EvalHandle eval;
  check(ood_eval_run(manifest.get(), &config, tpr, workers, eval.out()));
  if (out_dir.empty()) {
    write_text(ood_eval_text(eval.get()), "");
    return 0;
  }
  ensure_dir(out_dir);
  write_text(ood_eval_text(eval.get()), (fs::path(out_dir) / "report.txt").string());
  write_text(ood_eval_json(eval.get()), (fs::path(out_dir) / "report.json").string());
  const fs::path score_dir = fs::path(out_dir) / "scores";
  ensure_dir(score_dir);
  for (size_t i = 0; i < ood_eval_scores_count(eval.get()); ++i) {
    const ood_scores* s = ood_eval_scores(eval.get(), i);
    const auto path = score_dir / (file_stem(ood_scores_dataset(s)) + ".scores");
    check(ood_scores_write(s, path.string().c_str()));
  }
  return 0;
}

int cmd_hist(const std::string& scores_path, std::size_t bins, bool raw,
             const std::string& out) {
  ScoresHandle scores;
  check(ood_scores_read(scores_path.c_str(), scores.out()));
  std::vector<double> values(ood_scores_data(scores.get()),
                             ood_scores_data(scores.get()) + ood_scores_size(scores.get()));
  // kNN scores are negated distances; plot the distances themselves.
  ood_scorer_config config{};
  if (!raw && ood_scores_config(scores.get(), &config) && config.method == OOD_KNN) {
    for (double& v : values) v = -v;
  }
  std::vector<double> edges(bins);
  std::vector<std::uint64_t> counts(bins);
  size_t used = 0;
  check(ood_histogram(values.data(), values.size(), bins, edges.data(), counts.data(), &used));
  std::string text;
  for (size_t i = 0; i < used; ++i) {
    text += format_number(edges[i]) + " " + std::to_string(counts[i]) + "\n";
  }
  write_text(text, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-distribution detection from precomputed embeddings"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out;
  MethodFlags flags;
  double tpr = 0.95;
  unsigned workers = 0;

  auto* fit = app.add_subcommand("fit", "fit a scorer on the manifest's id-train entry");
  fit->add_option("--manifest", manifest, "dataset manifest")->required();
  fit->add_option("--out", out, "model output directory")->required();
  flags.add_to(*fit);

  std::string model_dir;
  std::string input;
  std::string name;
  bool csv_logits = false;
  auto* score = app.add_subcommand("score", "score a matrix file with a fitted model");
  score->add_option("--model", model_dir, "directory written by fit")->required();
  score->add_option("--input", input, "embedding or logit file")->required();
  score->add_option("--name", name, "dataset name recorded in the score file");
  score->add_flag("--logits", csv_logits, "treat a CSV input as logits");
  score->add_option("--workers", workers, "worker threads (0 = all cores)");
  score->add_option("--out", out, "score file (default: stdout)");

  std::string scores_path;
  auto* calibrate = app.add_subcommand("calibrate", "pick the ID threshold from ID scores");
  calibrate->add_option("--scores", scores_path, "in-distribution score file")->required();
  calibrate->add_option("--tpr", tpr, "target ID true-positive rate")->capture_default_str();
  calibrate->add_option("--out", out, "output file (default: stdout)");

  auto* eval = app.add_subcommand("eval", "FPR@TPR and AUROC for every ood-test entry");
  eval->add_option("--manifest", manifest, "dataset manifest")->required();
  eval->add_option("--tpr", tpr, "target ID true-positive rate")->capture_default_str();
  eval->add_option("--workers", workers, "worker threads (0 = all cores)");
  eval->add_option("--out", out, "report directory (default: text report on stdout)");
  flags.add_to(*eval);

  std::size_t bins = 50;
  bool raw = false;
  auto* hist = app.add_subcommand("hist", "histogram of a score file");
  hist->add_option("--scores", scores_path, "score file")->required();
  hist->add_option("--bins", bins, "number of bins")->capture_default_str();
  hist->add_flag("--raw", raw, "keep kNN scores instead of converting to distances");
  hist->add_option("--out", out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(manifest, flags, out);
    if (*score) return cmd_score(model_dir, input, name, csv_logits, workers, out);
    if (*calibrate) return cmd_calibrate(scores_path, tpr, out);
    if (*eval) return cmd_eval(manifest, flags, tpr, workers, out);
    if (*hist) return cmd_hist(scores_path, bins, raw, out);
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitConfig;
}
