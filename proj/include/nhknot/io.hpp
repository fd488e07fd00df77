#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nhknot/model.hpp"
#include "nhknot/nvsim.hpp"
#include "nhknot/types.hpp"

namespace nhknot {

using Json = nlohmann::json;

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

// Accepts a preset name or {"m", "gamma0": [minus, plus], "gamma1": [[minus, plus], ...], "gamma2": [...]}
// with every complex number written as [re, im].
ModelParams model_from_json(const Json& j);
Json model_to_json(const ModelParams& params);

// Overrides fields of base with any present in j.
NvParams nv_from_json(const Json& j, NvParams base = {});
Json nv_to_json(const NvParams& nv);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

// Minimal CSV builder with locale-independent, round-trippable number formatting.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& values);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

std::string format_number(double value);

}  // namespace nhknot
