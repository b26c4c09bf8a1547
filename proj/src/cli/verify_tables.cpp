#include "thyrofna/cli/verify_tables.hpp"

#include <cmath>

namespace thyrofna::cli {

std::vector<PublishedTable> published_tables() {
  std::vector<PublishedTable> tables;

  // Basic model on the internal test set (61 / 96 / 115 cases); reported
  // macro F1 89.19%.
  PublishedTable internal;
  internal.name = "internal_test";
  internal.confusion.counts = {{{57, 2, 2}, {0, 85, 11}, {2, 15, 98}}};
  internal.macro_f1 = 0.8919;
  internal.check_macro = true;
  internal.macro_tolerance = 0.0005;
  tables.push_back(internal);

  // Basic model on the external cohort; reported per-class F1 to two decimals.
  PublishedTable external;
  external.name = "external_test";
  external.confusion.counts = {{{261, 30, 9}, {44, 143, 128}, {16, 92, 292}}};
  external.per_class_f1 = {0.84, 0.49, 0.70};
  external.check_per_class = true;
  external.per_class_tolerance = 0.005;
  tables.push_back(external);

  return tables;
}

std::vector<TableCheck> verify_tables(const std::vector<PublishedTable> &tables) {
  std::vector<TableCheck> checks;
  for (const auto &table : tables) {
    const F1Scores f1 = f1_scores(table.confusion);
    if (table.check_macro) {
      TableCheck c{table.name + ".macro_f1", table.macro_f1, f1.macro, table.macro_tolerance, false};
      c.pass = std::abs(c.actual - c.expected) <= c.tolerance;
      checks.push_back(c);
    }
    if (table.check_per_class) {
      for (const ClassLabel label : kAllLabels) {
        const auto i = static_cast<std::size_t>(label_index(label));
        TableCheck c{table.name + ".f1." + std::string(label_name(label)), table.per_class_f1[i],
                     f1.per_class[i], table.per_class_tolerance, false};
        c.pass = std::abs(c.actual - c.expected) <= c.tolerance;
        checks.push_back(c);
      }
    }
  }
  return checks;
}

} // namespace thyrofna::cli
