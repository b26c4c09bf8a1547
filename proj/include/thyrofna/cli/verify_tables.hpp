#pragma once

#include "thyrofna/evaluation.hpp"

#include <array>
#include <string>
#include <vector>

namespace thyrofna::cli {

struct PublishedTable {
  std::string name;
  ConfusionMatrix confusion;
  // Reported values the recomputation must reproduce.
  std::array<double, kNumClasses> per_class_f1{};
  bool check_per_class = false;
  double per_class_tolerance = 0.0;
  double macro_f1 = 0.0;
  bool check_macro = false;
  double macro_tolerance = 0.0;
};

// The two published confusion matrices and their reported F1 values.
std::vector<PublishedTable> published_tables();

struct TableCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<TableCheck> verify_tables(const std::vector<PublishedTable> &tables);

} // namespace thyrofna::cli
