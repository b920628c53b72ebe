#include "skintex/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "json.hpp"
#include "skintex/error.hpp"
#include "skintex/ppm.hpp"

namespace skintex::pipeline {

namespace fs = std::filesystem;

namespace {

std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<fs::path> list_ppm(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void ingest_class(const fs::path& root, const char* subdir, Label label, const FeatureConfig& cfg,
                  IngestResult& out) {
  const fs::path dir = root / subdir;
  if (!fs::is_directory(dir)) throw DatasetError("missing subdirectory " + dir.string());

  std::size_t accepted = 0;
  for (const fs::path& file : list_ppm(dir)) {
    try {
      RgbImage img = ppm::read_file(file);
      if (img.width() != kExpectedPatchSize || img.height() != kExpectedPatchSize) {
        out.diagnostics.push_back("warning: " + file.string() + " is " + std::to_string(img.width()) + "x" +
                                  std::to_string(img.height()) + ", expected 80x80");
      }
      out.samples.push_back({file, label, extract_features(img, cfg)});
      ++accepted;
    } catch (const Error& e) {
      out.diagnostics.push_back("skipped: " + file.string() + ": " + e.what());
    }
  }
  if (accepted == 0) throw DatasetError("no decodable .ppm image in " + dir.string());
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Box-Muller, cosine branch only.
double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng);  // (0, 1]
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint8_t noisy(int base, std::mt19937_64& rng) {
  const double v = std::round(base + kNoiseSigma * standard_normal(rng));
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

RgbImage synth_image(Rgb base, int size, std::mt19937_64& rng) {
  auto jitter = [&rng](std::uint8_t c) {
    return static_cast<int>(c) + static_cast<int>(rng() % (2 * kBaseJitter + 1)) - kBaseJitter;
  };
  const int r = jitter(base.r);
  const int g = jitter(base.g);
  const int b = jitter(base.b);
  std::vector<Rgb> pixels(static_cast<std::size_t>(size) * size);
  for (Rgb& px : pixels) {
    px.r = noisy(r, rng);
    px.g = noisy(g, rng);
    px.b = noisy(b, rng);
  }
  return RgbImage(size, size, std::move(pixels));
}

}  // namespace

IngestResult ingest(const fs::path& root, const FeatureConfig& cfg) {
  if (!fs::is_directory(root)) throw DatasetError("dataset root " + root.string() + " is not a directory");
  IngestResult out;
  ingest_class(root, kSkinDir, Label::kSkin, cfg, out);
  ingest_class(root, kNonSkinDir, Label::kNonSkin, cfg, out);
  return out;
}

mlp::TrainResult train_pipeline(std::span<const LabeledSample> samples, const mlp::TrainConfig& cfg,
                                const FeatureConfig& features) {
  const bool has_skin = std::any_of(samples.begin(), samples.end(), [](auto& s) { return s.label == Label::kSkin; });
  const bool has_non_skin =
      std::any_of(samples.begin(), samples.end(), [](auto& s) { return s.label == Label::kNonSkin; });
  if (!has_skin || !has_non_skin) throw ArgumentError("training set must contain both skin and non-skin samples");

  std::vector<FeatureVector> raw;
  raw.reserve(samples.size());
  for (const auto& s : samples) raw.push_back(s.features);
  const NormalizationRanges ranges = fit_ranges(raw);

  std::vector<mlp::Sample> batch;
  batch.reserve(samples.size());
  for (const auto& s : samples) batch.push_back({normalize(s.features, ranges), mlp::target_for(s.label)});

  mlp::ModelMetadata meta;
  meta.features = features;
  return mlp::train(mlp::init_model(cfg.seed, ranges, meta), batch, cfg);
}

EvalReport evaluate(const mlp::MlpModel& m, std::span<const LabeledSample> samples) {
  if (samples.empty()) throw ArgumentError("evaluation set is empty");
  EvalReport r;
  for (const auto& s : samples) {
    const Label predicted = mlp::classify(m, s.features).label;
    if (s.label == Label::kSkin) {
      predicted == Label::kSkin ? ++r.true_positive : ++r.false_negative;
    } else {
      predicted == Label::kNonSkin ? ++r.true_negative : ++r.false_positive;
    }
    if (predicted != s.label) r.misclassified.push_back(s.path.string());
  }
  r.accuracy = static_cast<double>(r.true_positive + r.true_negative) / static_cast<double>(r.total());
  return r;
}

std::string render_text(const EvalReport& r) {
  char line[160];
  std::string out;
  out += "                 predicted skin  predicted non-skin\n";
  std::snprintf(line, sizeof(line), "actual skin      %14zu  %18zu\n", r.true_positive, r.false_negative);
  out += line;
  std::snprintf(line, sizeof(line), "actual non-skin  %14zu  %18zu\n", r.false_positive, r.true_negative);
  out += line;
  std::snprintf(line, sizeof(line), "samples   %zu\naccuracy  %.4f\n", r.total(), r.accuracy);
  out += line;
  out += "misclassified " + std::to_string(r.misclassified.size()) + "\n";
  for (const auto& p : r.misclassified) out += "  " + p + "\n";
  return out;
}

std::string render_json(const EvalReport& r) {
  nlohmann::ordered_json doc;
  doc["true_positive"] = r.true_positive;
  doc["true_negative"] = r.true_negative;
  doc["false_positive"] = r.false_positive;
  doc["false_negative"] = r.false_negative;
  doc["total"] = r.total();
  doc["accuracy"] = r.accuracy;
  doc["misclassified"] = r.misclassified;
  return doc.dump(2) + "\n";
}

void write_feature_dump(std::ostream& out, std::span<const LabeledSample> samples) {
  out << "path,label," << feature_order_tag() << '\n';
  for (const auto& s : samples) {
    out << s.path.string() << ',' << mlp::to_string(s.label);
    for (double v : s.features.values) out << ',' << format_real(v);
    out << '\n';
  }
}

std::vector<std::pair<Label, RgbImage>> synth_images(const SynthConfig& cfg) {
  if (cfg.per_class < 1) throw ArgumentError("per_class must be at least 1");
  if (cfg.size < 8) throw ArgumentError("image size must be at least 8");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::pair<Label, RgbImage>> out;
  out.reserve(2 * static_cast<std::size_t>(cfg.per_class));
  for (int k = 0; k < cfg.per_class; ++k) out.emplace_back(Label::kSkin, synth_image(kSkinBase, cfg.size, rng));
  for (int k = 0; k < cfg.per_class; ++k) {
    out.emplace_back(Label::kNonSkin, synth_image(kNonSkinBase, cfg.size, rng));
  }
  return out;
}

std::vector<fs::path> synth_corpus(const SynthConfig& cfg, const fs::path& out) {
  auto images = synth_images(cfg);
  std::error_code ec;
  for (const char* sub : {kSkinDir, kNonSkinDir}) {
    fs::create_directories(out / sub, ec);
    if (ec) throw Error("cannot create " + (out / sub).string() + ": " + ec.message());
  }
  std::vector<fs::path> written;
  written.reserve(images.size());
  int index[2] = {0, 0};
  for (const auto& [label, img] : images) {
    const bool skin = label == Label::kSkin;
    char name[32];
    std::snprintf(name, sizeof(name), "%s_%04d.ppm", skin ? kSkinDir : kNonSkinDir, index[skin ? 0 : 1]++);
    fs::path path = out / (skin ? kSkinDir : kNonSkinDir) / name;
    ppm::write_file(path, img);
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace skintex::pipeline
