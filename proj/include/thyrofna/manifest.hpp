#pragma once

#include "thyrofna/core_types.hpp"

#include <filesystem>
#include <vector>

namespace thyrofna {

struct ManifestOptions {
  // Fail with MissingFile when a referenced image does not exist.
  bool check_files = true;
  // Drop labels while reading; used by inference so predictions stay label-blind.
  bool read_labels = true;
};

// Reads a `id,path,label,split` CSV. Paths are resolved against the
// manifest's directory.
std::vector<ImageRecord> load_manifest(const std::filesystem::path &path,
                                       const ManifestOptions &options = {});

// Writes records with paths relative to the manifest's directory when possible.
void write_manifest(const std::filesystem::path &path, const std::vector<ImageRecord> &records);

// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

} // namespace thyrofna
