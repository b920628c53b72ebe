#include "skintex/cli.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "skintex/error.hpp"
#include "skintex/features.hpp"
#include "skintex/mlp.hpp"
#include "skintex/pipeline.hpp"
#include "skintex/ppm.hpp"

namespace skintex::cli {

namespace fs = std::filesystem;

namespace {

// Raised for flag values that parse but make no sense; maps to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

struct FeatureFlags {
  std::string displacement = "1,0";
  int levels = 256;

  void add_to(CLI::App* app) {
    app->add_option("--displacement", displacement, "GLCM pixel offset as dx,dy")->capture_default_str();
    app->add_option("--levels", levels, "Gray levels for the GLCM")->check(CLI::Range(2, 256))->capture_default_str();
  }

  FeatureConfig resolve() const {
    const auto comma = displacement.find(',');
    int dx = 0;
    int dy = 0;
    auto parse = [](std::string_view s, int& v) {
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      return res.ec == std::errc{} && res.ptr == s.data() + s.size() && !s.empty();
    };
    const std::string_view text = displacement;
    if (comma == std::string::npos || !parse(text.substr(0, comma), dx) || !parse(text.substr(comma + 1), dy)) {
      throw UsageError("--displacement expects two integers 'dx,dy', got '" + displacement + "'");
    }
    if (dx == 0 && dy == 0) throw UsageError("--displacement 0,0 is not allowed");
    return FeatureConfig{Displacement{dx, dy}, levels};
  }
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_diagnostics(const pipeline::IngestResult& r, std::ostream& err) {
  for (const auto& d : r.diagnostics) err << d << '\n';
}

int cmd_extract(const std::vector<std::string>& images, const std::string& data, const FeatureFlags& flags,
                std::ostream& out, std::ostream& err) {
  const FeatureConfig cfg = flags.resolve();
  if (!data.empty()) {
    const auto result = pipeline::ingest(data, cfg);
    print_diagnostics(result, err);
    pipeline::write_feature_dump(out, result.samples);
    return kExitOk;
  }
  if (images.empty()) throw UsageError("extract needs an image path or --data");
  int status = kExitOk;
  for (const auto& path : images) {
    try {
      const FeatureVector v = extract_features(ppm::read_file(path), cfg);
      std::string line;
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (i > 0) line += ',';
        line += format_real(v[i]);
      }
      out << line << '\n';
    } catch (const Error& e) {
      err << path << ": " << e.what() << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

int cmd_train(const std::string& data, const std::string& model_path, const mlp::TrainConfig& cfg,
              const FeatureFlags& flags, std::ostream& out, std::ostream& err) {
  const FeatureConfig features = flags.resolve();
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const auto ingested = pipeline::ingest(data, features);
  print_diagnostics(ingested, err);

  const auto result = pipeline::train_pipeline(ingested.samples, cfg, features);
  {
    std::ofstream file(model_path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write model file " + model_path);
    file << mlp::save_model(result.model);
    if (!file) throw Error("write failed for " + model_path);
  }
  out << "samples " << ingested.samples.size() << '\n'
      << "reason " << mlp::to_string(result.trace.reason) << '\n'
      << "epochs " << result.trace.epochs.size() << '\n'
      << "accepted " << result.trace.accepted_steps() << '\n'
      << "final_sse " << format_real(result.trace.final_sse()) << '\n'
      << "model " << model_path << '\n';
  return kExitOk;
}

int cmd_classify(const std::string& model_path, const std::vector<std::string>& images, std::ostream& out,
                 std::ostream& err) {
  const mlp::MlpModel model = mlp::load_model(read_text(model_path));
  int status = kExitOk;
  for (const auto& path : images) {
    try {
      const auto c = mlp::classify(model, extract_features(ppm::read_file(path), model.metadata.features));
      out << path << '\t' << mlp::to_string(c.label) << '\t' << format_real(c.score) << '\n';
    } catch (const Error& e) {
      err << path << ": " << e.what() << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

int cmd_evaluate(const std::string& model_path, const std::string& data, bool as_json, std::ostream& out,
                 std::ostream& err) {
  const mlp::MlpModel model = mlp::load_model(read_text(model_path));
  const auto ingested = pipeline::ingest(data, model.metadata.features);
  print_diagnostics(ingested, err);
  const auto report = pipeline::evaluate(model, ingested.samples);
  out << (as_json ? pipeline::render_json(report) : pipeline::render_text(report));
  return kExitOk;
}

int cmd_synth(const pipeline::SynthConfig& cfg, const std::string& dir, std::ostream& out) {
  if (cfg.per_class < 1 || cfg.size < 8) throw UsageError("--per-class must be >= 1 and --size >= 8");
  const auto written = pipeline::synth_corpus(cfg, dir);
  out << "wrote " << written.size() << " images to " << dir << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skin texture classification from color moments and GLCM features", "skintex"};
  app.require_subcommand(1, 1);

  FeatureFlags extract_flags;
  std::vector<std::string> extract_images;
  std::string extract_data;
  auto* extract = app.add_subcommand("extract", "Print the 13-element feature vector of each image");
  extract->add_option("images", extract_images, "PPM images")->check(CLI::ExistingFile);
  extract->add_option("--data", extract_data, "Dump features of a whole dataset as CSV")->check(CLI::ExistingDirectory);
  extract_flags.add_to(extract);

  FeatureFlags train_flags;
  mlp::TrainConfig train_cfg;
  std::string train_data;
  std::string train_out;
  auto* train = app.add_subcommand("train", "Train the network on <data>/skin and <data>/nonskin");
  train->add_option("--data", train_data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", train_out, "Model file to write")->required();
  train->add_option("--seed", train_cfg.seed, "Weight initialization seed")->capture_default_str();
  train->add_option("--goal", train_cfg.sse_goal, "SSE goal")->capture_default_str();
  train->add_option("--max-epochs", train_cfg.max_epochs, "Epoch limit")->capture_default_str();
  train->add_option("--lr", train_cfg.lr_initial, "Initial learning rate")->capture_default_str();
  train->add_option("--lr-increase", train_cfg.lr_increase, "Rate growth after an improving step")
      ->capture_default_str();
  train->add_option("--lr-decrease", train_cfg.lr_decrease, "Rate shrink after a rejected step")
      ->capture_default_str();
  train->add_option("--max-growth", train_cfg.max_sse_growth, "Largest accepted SSE ratio")->capture_default_str();
  train->add_option("--lr-min", train_cfg.lr_min, "Learning rate floor")->capture_default_str();
  train->add_option("--lr-max", train_cfg.lr_max, "Learning rate ceiling")->capture_default_str();
  train_flags.add_to(train);

  std::string classify_model;
  std::vector<std::string> classify_images;
  auto* classify = app.add_subcommand("classify", "Label images as skin or non-skin");
  classify->add_option("--model", classify_model, "Model file")->required()->check(CLI::ExistingFile);
  classify->add_option("images", classify_images, "PPM images")->required();

  std::string eval_model;
  std::string eval_data;
  bool eval_json = false;
  auto* evaluate = app.add_subcommand("evaluate", "Report accuracy on a labeled dataset");
  evaluate->add_option("--model", eval_model, "Model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", eval_data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  evaluate->add_flag("--json", eval_json, "Emit the report as JSON");

  pipeline::SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic two-class corpus");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_cfg.seed, "Generator seed")->capture_default_str();
  synth->add_option("--per-class", synth_cfg.per_class, "Images per class")->capture_default_str();
  synth->add_option("--size", synth_cfg.size, "Image side in pixels")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(extract_images, extract_data, extract_flags, out, err);
    if (train->parsed()) return cmd_train(train_data, train_out, train_cfg, train_flags, out, err);
    if (classify->parsed()) return cmd_classify(classify_model, classify_images, out, err);
    if (evaluate->parsed()) return cmd_evaluate(eval_model, eval_data, eval_json, out, err);
    return cmd_synth(synth_cfg, synth_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mlp::TrainingDivergedError& e) {
    err << "error: " << e.what() << " after " << e.trace().epochs.size() << " epochs\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"skintex"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace skintex::cli
