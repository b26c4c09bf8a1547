#include "unit/check.hpp"
#include "unit/support.hpp"

#include "thyrofna/image.hpp"
#include "thyrofna/manifest.hpp"

#include <fstream>

using namespace thyrofna;

namespace {

std::filesystem::path write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::filesystem::path dir_with_images(const std::string &name) {
  const auto dir = testsupport::fresh_dir(name);
  std::filesystem::create_directories(dir / "img");
  for (const char *id : {"a", "b", "c"}) {
    write_png(dir / "img" / (std::string(id) + ".png"), testsupport::random_image(8, 6, 1));
  }
  return dir;
}

} // namespace

TEST_SUITE("manifest") {

TEST_CASE("reads records with relative paths, labels, and splits") {
  const auto dir = dir_with_images("manifest_read");
  const auto path = write_file(dir / "m.csv", "id,path,label,split\n"
                                             "a,img/a.png,BENIGN,TRAIN\n"
                                             "b,img/b.png,MALIGNANT,\n"
                                             "c,img/c.png,,EXTERNAL\n");
  const auto records = load_manifest(path);
  REQUIRE(records.size() == 3);
  CHECK(records[0].id == "a");
  CHECK(records[0].path == dir / "img" / "a.png");
  CHECK(records[0].label == ClassLabel::BENIGN);
  CHECK(records[0].split == SplitTag::TRAIN);
  CHECK(records[1].split == SplitTag::UNSPLIT);
  CHECK_FALSE(records[2].label.has_value());
}

TEST_CASE("header must be exact; a UTF-8 BOM is tolerated") {
  const auto dir = dir_with_images("manifest_header");
  CHECK_THROWS_CODE(load_manifest(write_file(dir / "m.csv", "id,path,label\na,img/a.png,BENIGN\n")),
                    ErrorCode::MalformedManifest);
  CHECK(load_manifest(write_file(dir / "bom.csv", "\xEF\xBB\xBFid,path,label,split\na,img/a.png,BENIGN,\n")).size() == 1);
}

TEST_CASE("error taxonomy") {
  const auto dir = dir_with_images("manifest_errors");
  CHECK_THROWS_CODE(load_manifest(write_file(dir / "dup.csv", "id,path,label,split\na,img/a.png,BENIGN,\na,img/b.png,BENIGN,\n")),
                    ErrorCode::DuplicateId);
  CHECK_THROWS_CODE(load_manifest(write_file(dir / "miss.csv", "id,path,label,split\nz,img/z.png,BENIGN,\n")),
                    ErrorCode::MissingFile);
  CHECK_THROWS_CODE(load_manifest(write_file(dir / "lab.csv", "id,path,label,split\na,img/a.png,MAYBE,\n")),
                    ErrorCode::MalformedManifest);
  CHECK_THROWS_CODE(load_manifest(write_file(dir / "unl.csv", "id,path,label,split\na,img/a.png,,TEST\n")),
                    ErrorCode::MalformedManifest);
  CHECK_THROWS_CODE(load_manifest(dir / "absent.csv"), ErrorCode::MissingFile);
}

TEST_CASE("read_labels=false drops labels for label-blind consumers") {
  const auto dir = dir_with_images("manifest_blind");
  const auto path = write_file(dir / "m.csv", "id,path,label,split\na,img/a.png,BENIGN,TEST\n");
  ManifestOptions options;
  options.read_labels = false;
  const auto records = load_manifest(path, options);
  CHECK_FALSE(records[0].label.has_value());
}

TEST_CASE("write then read is the identity on records") {
  const auto dir = dir_with_images("manifest_roundtrip");
  std::vector<ImageRecord> records(2);
  records[0] = {"a", dir / "img" / "a.png", ClassLabel::INDET_SUS, SplitTag::VAL, 0, 0};
  records[1] = {"id,with comma", dir / "img" / "b.png", ClassLabel::BENIGN, SplitTag::UNSPLIT, 0, 0};
  write_manifest(dir / "out.csv", records);
  const auto back = load_manifest(dir / "out.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].id == "id,with comma");
  CHECK(back[0].label == ClassLabel::INDET_SUS);
  CHECK(back[0].split == SplitTag::VAL);
  CHECK(std::filesystem::equivalent(back[1].path, records[1].path));
}

TEST_CASE("csv splitting honours quotes") {
  const auto f = split_csv_line("a,\"b,c\",\"d\"\"e\",");
  REQUIRE(f.size() == 4);
  CHECK(f[1] == "b,c");
  CHECK(f[2] == "d\"e");
  CHECK(f[3].empty());
}

}
