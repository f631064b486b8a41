#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "biped/check.hpp"
#include "biped/model.hpp"

namespace biped::test {

inline const RobotModel& sample_robot() {
  static const RobotModel model = load_model(sample_model_config());
  return model;
}

inline RobotModel pinned_robot(char axis = 'z') {
  return load_model(sample_model_config() + "\n[base]\npinned_axis = " + axis + "\n");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline double max_abs(const MatX& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Replace the first line of `text` starting with `key =` inside `[section]`.
inline std::string with_value(const std::string& text, const std::string& section,
                              const std::string& key, const std::string& value) {
  const auto s = text.find("[" + section + "]");
  const auto k = text.find(key + " =", s == std::string::npos ? 0 : s);
  if (k == std::string::npos) return text;
  const auto e = text.find('\n', k);
  return text.substr(0, k) + key + " = " + value + text.substr(e);
}

}  // namespace biped::test
