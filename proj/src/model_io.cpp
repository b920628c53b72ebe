#include <charconv>
#include <cmath>
#include <string>

#include "json.hpp"
#include "skintex/mlp.hpp"

namespace skintex::mlp {

namespace {

using json = nlohmann::json;
using Kind = ModelFormatError::Kind;

void append_real(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

void append_reals(std::string& out, std::span<const double> values, std::size_t per_line) {
  out += '[';
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += (per_line > 0 && k % per_line == 0) ? ",\n    " : ", ";
    append_real(out, values[k]);
  }
  out += ']';
}

const json& member(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ModelFormatError(Kind::kSchema, std::string("missing field '") + key + "'");
  return *it;
}

double real_at(const json& value, const std::string& where) {
  if (!value.is_number()) throw ModelFormatError(Kind::kSchema, where + " is not a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw ModelFormatError(Kind::kNonFinite, where + " is not finite");
  return v;
}

void read_reals(const json& doc, const char* key, std::span<double> out) {
  const json& arr = member(doc, key);
  if (!arr.is_array()) throw ModelFormatError(Kind::kSchema, std::string(key) + " is not an array");
  if (arr.size() != out.size()) {
    throw ModelFormatError(Kind::kDimension, std::string(key) + " has " + std::to_string(arr.size()) +
                                                 " values, expected " + std::to_string(out.size()));
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = real_at(arr[k], std::string(key) + "[" + std::to_string(k) + "]");
}

int int_at(const json& value, const std::string& where) {
  if (!value.is_number_integer()) throw ModelFormatError(Kind::kSchema, where + " is not an integer");
  return value.get<int>();
}

}  // namespace

std::string save_model(const MlpModel& m) {
  const auto flat = m.params.flat();
  std::string out;
  out += "{\n";
  out += "  \"format_version\": " + std::to_string(kFormatVersion) + ",\n";
  out += "  \"dims\": [" + std::to_string(kInputs) + ", " + std::to_string(kHidden) + ", 1],\n";
  out += "  \"activation\": \"tanh\",\n";
  out += "  \"hidden_weights\": ";
  append_reals(out, flat.subspan(Parameters::kHiddenWeightsOffset, kHidden * kInputs), kInputs);
  out += ",\n  \"hidden_biases\": ";
  append_reals(out, flat.subspan(Parameters::kHiddenBiasesOffset, kHidden), 10);
  out += ",\n  \"output_weights\": ";
  append_reals(out, flat.subspan(Parameters::kOutputWeightsOffset, kHidden), 10);
  out += ",\n  \"output_bias\": ";
  append_real(out, m.params.output_bias());
  out += ",\n  \"ranges\": [";
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    out += i == 0 ? "\n    [" : ",\n    [";
    append_real(out, m.ranges.ranges[i].min);
    out += ", ";
    append_real(out, m.ranges.ranges[i].max);
    out += ']';
  }
  out += "\n  ],\n  \"metadata\": {\n";
  out += "    \"feature_order\": " + json(m.metadata.feature_order).dump() + ",\n";
  out += "    \"displacement\": [" + std::to_string(m.metadata.features.displacement.dx) + ", " +
         std::to_string(m.metadata.features.displacement.dy) + "],\n";
  out += "    \"levels\": " + std::to_string(m.metadata.features.levels) + "\n";
  out += "  }\n}\n";
  return out;
}

MlpModel load_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ModelFormatError(Kind::kSyntax, e.what());
  } catch (const json::out_of_range& e) {
    // 406: a number literal overflows double
    throw ModelFormatError(e.id == 406 ? Kind::kNonFinite : Kind::kSyntax, e.what());
  }
  if (!doc.is_object()) throw ModelFormatError(Kind::kSyntax, "top level is not an object");

  const int version = int_at(member(doc, "format_version"), "format_version");
  if (version != kFormatVersion) {
    throw ModelFormatError(Kind::kVersion, "unsupported format_version " + std::to_string(version) +
                                               " (this build reads " + std::to_string(kFormatVersion) + ")");
  }

  const json& dims = member(doc, "dims");
  if (!dims.is_array() || dims.size() != 3 || !dims[0].is_number_integer() || !dims[1].is_number_integer() ||
      !dims[2].is_number_integer()) {
    throw ModelFormatError(Kind::kSchema, "dims must be three integers");
  }
  if (dims[0].get<long>() != static_cast<long>(kInputs) || dims[1].get<long>() != static_cast<long>(kHidden) ||
      dims[2].get<long>() != 1) {
    throw ModelFormatError(Kind::kDimension, "dims " + dims.dump() + " do not match the 13-50-1 network");
  }
  const json& activation = member(doc, "activation");
  if (activation != "tanh") throw ModelFormatError(Kind::kSchema, "activation must be \"tanh\"");

  MlpModel m;
  auto flat = m.params.flat();
  read_reals(doc, "hidden_weights", flat.subspan(Parameters::kHiddenWeightsOffset, kHidden * kInputs));
  read_reals(doc, "hidden_biases", flat.subspan(Parameters::kHiddenBiasesOffset, kHidden));
  read_reals(doc, "output_weights", flat.subspan(Parameters::kOutputWeightsOffset, kHidden));
  m.params.output_bias() = real_at(member(doc, "output_bias"), "output_bias");

  const json& ranges = member(doc, "ranges");
  if (!ranges.is_array()) throw ModelFormatError(Kind::kSchema, "ranges is not an array");
  if (ranges.size() != kFeatureCount) {
    throw ModelFormatError(Kind::kDimension, "ranges has " + std::to_string(ranges.size()) + " entries, expected 13");
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const std::string where = "ranges[" + std::to_string(i) + "]";
    if (!ranges[i].is_array() || ranges[i].size() != 2) throw ModelFormatError(Kind::kSchema, where + " is not a pair");
    Range& r = m.ranges.ranges[i];
    r.min = real_at(ranges[i][0], where);
    r.max = real_at(ranges[i][1], where);
    if (r.min > r.max) throw ModelFormatError(Kind::kSchema, where + " has min > max");
  }

  const json& meta = member(doc, "metadata");
  if (!meta.is_object()) throw ModelFormatError(Kind::kSchema, "metadata is not an object");
  const json& order = member(meta, "feature_order");
  if (!order.is_string() || order.get<std::string>() != feature_order_tag()) {
    throw ModelFormatError(Kind::kSchema, "feature_order does not match " + feature_order_tag());
  }
  m.metadata.feature_order = order.get<std::string>();
  const json& disp = member(meta, "displacement");
  if (!disp.is_array() || disp.size() != 2) throw ModelFormatError(Kind::kSchema, "displacement must be [dx, dy]");
  const int dx = int_at(disp[0], "displacement[0]");
  const int dy = int_at(disp[1], "displacement[1]");
  if (dx == 0 && dy == 0) throw ModelFormatError(Kind::kSchema, "displacement (0,0) is not allowed");
  m.metadata.features.displacement = {dx, dy};
  const int levels = int_at(member(meta, "levels"), "levels");
  if (levels < 2 || levels > 256) throw ModelFormatError(Kind::kSchema, "levels must lie in [2, 256]");
  m.metadata.features.levels = levels;
  return m;
}

}  // namespace skintex::mlp
