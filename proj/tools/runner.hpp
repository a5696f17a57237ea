#pragma once

// One analysis per invocation: a resolved config document in, a JSON result
// and long-format plot rows out. Everything that affects the numbers lives in
// the resolved document, so replaying it reproduces the output byte for byte.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace bohrkit::cli {

struct PlotRow {
  double x = 0.0;
  std::string series;
  double value = 0.0;
  double error = 0.0;
};

struct Extra {
  std::string suffix;  // file name suffix, e.g. "sigma_hat.csv"
  std::string text;
};

struct Output {
  nlohmann::json result;
  std::vector<PlotRow> rows;
  std::vector<Extra> extras;
};

const std::vector<std::string>& commands();

// `config` must carry an explicit "seed"; analysis options live under
// "analysis". Throws the bohrkit error types.
Output run(const std::string& command, const nlohmann::json& config, int threads);

std::uint64_t fnv1a(const std::string& bytes);

std::string plot_csv(const std::vector<PlotRow>& rows);

}  // namespace bohrkit::cli
