#include "thyrofna/manifest.hpp"

#include "thyrofna/error.hpp"

#include <fstream>
#include <set>

namespace thyrofna {

namespace {

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) {
    ++begin;
  }
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' || text[end - 1] == '\r')) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

std::string quote_if_needed(const std::string &field) {
  if (field.find_first_of(",\"\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

} // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::vector<ImageRecord> load_manifest(const std::filesystem::path &path,
                                       const ManifestOptions &options) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::MissingFile, "manifest not found: " + path.string());
  }
  const std::filesystem::path base = path.parent_path();

  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorCode::MalformedManifest, "manifest is empty: " + path.string());
  }
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
    line.erase(0, 3); // UTF-8 BOM
  }
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"id", "path", "label", "split"}) {
    fail(ErrorCode::MalformedManifest, "expected header id,path,label,split");
  }

  std::vector<ImageRecord> records;
  std::set<std::string> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (fields.size() != 4) {
      fail(ErrorCode::MalformedManifest, where + ": expected 4 fields");
    }
    ImageRecord record;
    record.id = fields[0];
    if (record.id.empty()) {
      fail(ErrorCode::MalformedManifest, where + ": empty id");
    }
    if (fields[1].empty()) {
      fail(ErrorCode::MalformedManifest, where + ": empty path");
    }
    record.path = base / fields[1];
    if (!fields[2].empty()) {
      const auto label = parse_label(fields[2]);
      if (!label) {
        fail(ErrorCode::MalformedManifest, where + ": unknown label '" + fields[2] + "'");
      }
      if (options.read_labels) {
        record.label = *label;
      }
    }
    const auto split = parse_split(fields[3]);
    if (!split) {
      fail(ErrorCode::MalformedManifest, where + ": unknown split '" + fields[3] + "'");
    }
    record.split = *split;
    const bool needs_label = record.split == SplitTag::TRAIN || record.split == SplitTag::VAL ||
                             record.split == SplitTag::TEST;
    if (needs_label && fields[2].empty()) {
      fail(ErrorCode::MalformedManifest, where + ": split " + fields[3] + " requires a label");
    }
    if (!seen.insert(record.id).second) {
      fail(ErrorCode::DuplicateId, "duplicate id '" + record.id + "' at " + where);
    }
    if (options.check_files && !std::filesystem::exists(record.path)) {
      fail(ErrorCode::MissingFile, "image for id '" + record.id + "' not found: " + record.path.string());
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_manifest(const std::filesystem::path &path, const std::vector<ImageRecord> &records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write manifest: " + path.string());
  }
  const std::filesystem::path base = path.parent_path();
  out << "id,path,label,split\n";
  for (const auto &record : records) {
    std::filesystem::path rel = record.path;
    if (record.path.is_absolute() || !base.empty()) {
      std::error_code ec;
      const auto relative = std::filesystem::relative(record.path, base.empty() ? "." : base, ec);
      if (!ec && !relative.empty()) {
        rel = relative;
      }
    }
    out << quote_if_needed(record.id) << ',' << quote_if_needed(rel.generic_string()) << ','
        << (record.label ? label_name(*record.label) : "") << ',' << split_name(record.split) << '\n';
  }
  if (!out) {
    fail(ErrorCode::IoFailure, "failed writing manifest: " + path.string());
  }
}

} // namespace thyrofna
