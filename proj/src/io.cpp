#include "nhknot/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nhknot/errors.hpp"

namespace nhknot {
namespace {

CouplingPair pair_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw InvalidArgument(std::string("model: ") + what + " must be a [minus, plus] pair of complex numbers");
  }
  return {complex_from_json(j[0]), complex_from_json(j[1])};
}

Json pair_to_json(const CouplingPair& p) { return Json::array({complex_to_json(p.minus), complex_to_json(p.plus)}); }

std::vector<CouplingPair> pairs_from_json(const Json& j, const char* what) {
  std::vector<CouplingPair> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw InvalidArgument(std::string("model: ") + what + " must be a list");
  for (const auto& item : j) out.push_back(pair_from_json(item, what));
  return out;
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidArgument("complex numbers are written as [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ModelParams model_from_json(const Json& j) {
  if (j.is_string()) return preset_params(j.get<std::string>());
  if (!j.is_object()) throw InvalidArgument("model: expected a preset name or an object");
  if (j.contains("preset")) return preset_params(j.at("preset").get<std::string>());
  ModelParams p;
  if (!j.contains("gamma0")) throw InvalidArgument("model: missing gamma0");
  p.gamma0 = pair_from_json(j.at("gamma0"), "gamma0");
  p.gamma1 = pairs_from_json(j.value("gamma1", Json()), "gamma1");
  p.gamma2 = pairs_from_json(j.value("gamma2", Json()), "gamma2");
  if (j.contains("m")) {
    const int m = j.at("m").get<int>();
    if (m < 0) throw InvalidArgument("model: m must be non-negative");
    if (static_cast<std::size_t>(m) != p.gamma1.size()) {
      throw InvalidArgument("model: m = " + std::to_string(m) + " but gamma1 lists " + std::to_string(p.gamma1.size()) +
                            " ranges");
    }
  }
  p.validate();
  return p;
}

Json model_to_json(const ModelParams& params) {
  Json g1 = Json::array(), g2 = Json::array();
  for (const auto& p : params.gamma1) g1.push_back(pair_to_json(p));
  for (const auto& p : params.gamma2) g2.push_back(pair_to_json(p));
  return {{"m", params.range()}, {"gamma0", pair_to_json(params.gamma0)}, {"gamma1", g1}, {"gamma2", g2}};
}

NvParams nv_from_json(const Json& j, NvParams base) {
  if (j.is_null()) return base;
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "purified") return purified_nv();
    if (name == "natural_abundance") return natural_abundance_nv();
    throw InvalidArgument("nv: unknown configuration '" + name + "' (valid: purified, natural_abundance)");
  }
  if (!j.is_object()) throw InvalidArgument("nv: expected an object");
  auto read = [&j](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  read("D", base.D);
  read("gamma_e", base.gamma_e);
  read("gamma_n", base.gamma_n);
  read("B_field", base.B_field);
  read("Q_quad", base.Q_quad);
  read("A", base.A);
  read("T2_star", base.T2_star);
  read("lambda", base.lambda);
  base.validate();
  return base;
}

Json nv_to_json(const NvParams& nv) {
  return {{"D", nv.D},           {"gamma_e", nv.gamma_e}, {"gamma_n", nv.gamma_n},
          {"B_field", nv.B_field}, {"Q_quad", nv.Q_quad},   {"A", nv.A},
          {"T2_star", nv.T2_star}, {"lambda", nv.lambda}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != header_.size()) throw Error("csv: row width does not match header");
  rows_.push_back(values);
}

std::string CsvTable::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace nhknot
