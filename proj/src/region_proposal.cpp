#include "thyrofna/region_proposal.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/image.hpp"
#include "thyrofna/manifest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>

#include <opencv2/imgproc.hpp>

namespace thyrofna {

namespace {

int median_intensity(const cv::Mat &gray) {
  std::array<std::size_t, 256> hist{};
  for (int r = 0; r < gray.rows; ++r) {
    const auto *row = gray.ptr<std::uint8_t>(r);
    for (int c = 0; c < gray.cols; ++c) {
      ++hist[row[c]];
    }
  }
  const std::size_t half = (gray.total() + 1) / 2;
  std::size_t seen = 0;
  for (int v = 0; v < 256; ++v) {
    seen += hist[static_cast<std::size_t>(v)];
    if (seen >= half) {
      return v;
    }
  }
  return 255;
}

template <typename T> T parse_number(const std::string &field, const std::string &where) {
  T value{};
  const auto *end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::MalformedProposalFile, where + ": bad number '" + field + "'");
  }
  return value;
}

} // namespace

bool is_valid_proposal(const RegionProposal &p) {
  return p.x >= 0 && p.y >= 0 && p.w >= kMinProposalSide && p.h >= kMinProposalSide &&
         p.x + p.w <= kCanonicalWidth && p.y + p.h <= kCanonicalHeight && p.score >= 0.0 &&
         p.score <= 1.0;
}

bool proposal_before(const RegionProposal &a, const RegionProposal &b) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  const long area_a = static_cast<long>(a.w) * a.h;
  const long area_b = static_cast<long>(b.w) * b.h;
  if (area_a != area_b) {
    return area_a > area_b;
  }
  if (a.x != b.x) {
    return a.x < b.x;
  }
  if (a.y != b.y) {
    return a.y < b.y;
  }
  if (a.w != b.w) {
    return a.w < b.w;
  }
  return a.h < b.h;
}

void sort_proposals(std::vector<RegionProposal> &proposals) {
  std::sort(proposals.begin(), proposals.end(), proposal_before);
}

void ProposerConfig::validate() const {
  if (blur_kernel < 1 || blur_kernel % 2 == 0) {
    fail(ErrorCode::ConfigError, "proposer.blur_kernel must be a positive odd integer");
  }
  if (!(threshold_offset > 0.0)) {
    fail(ErrorCode::ConfigError, "proposer.threshold_offset must be positive");
  }
  if (min_cluster_area <= 0) {
    fail(ErrorCode::ConfigError, "proposer.min_cluster_area must be positive");
  }
  if (margin < 0) {
    fail(ErrorCode::ConfigError, "proposer.margin must be non-negative");
  }
  if (backend == ProposerBackend::EXTERNAL_FILE && external_file.empty()) {
    fail(ErrorCode::ConfigError, "proposer.external_file is required for the external backend");
  }
}

std::vector<RegionProposal> propose_regions(const cv::Mat &canonical, const ProposerConfig &config) {
  require_canonical(canonical, "propose_regions");
  config.validate();

  cv::Mat gray;
  cv::cvtColor(canonical, gray, cv::COLOR_BGR2GRAY);
  if (config.blur_kernel > 1) {
    cv::GaussianBlur(gray, gray, cv::Size(config.blur_kernel, config.blur_kernel), 0.0);
  }
  const double threshold = median_intensity(gray) - config.threshold_offset;
  cv::Mat mask;
  cv::compare(gray, cv::Scalar(threshold), mask, cv::CMP_LT);

  cv::Mat labels;
  cv::Mat stats;
  cv::Mat centroids;
  const int count = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);

  struct Component {
    cv::Rect box;
    int area;
  };
  std::vector<Component> kept;
  int largest = 0;
  for (int i = 1; i < count; ++i) { // label 0 is background
    const int area = stats.at<int>(i, cv::CC_STAT_AREA);
    if (area < config.min_cluster_area) {
      continue;
    }
    const int x0 = std::max(0, stats.at<int>(i, cv::CC_STAT_LEFT) - config.margin);
    const int y0 = std::max(0, stats.at<int>(i, cv::CC_STAT_TOP) - config.margin);
    const int x1 = std::min(kCanonicalWidth, stats.at<int>(i, cv::CC_STAT_LEFT) +
                                                 stats.at<int>(i, cv::CC_STAT_WIDTH) + config.margin);
    const int y1 = std::min(kCanonicalHeight, stats.at<int>(i, cv::CC_STAT_TOP) +
                                                  stats.at<int>(i, cv::CC_STAT_HEIGHT) + config.margin);
    largest = std::max(largest, area);
    if (x1 - x0 < kMinProposalSide || y1 - y0 < kMinProposalSide) {
      continue;
    }
    kept.push_back({cv::Rect(x0, y0, x1 - x0, y1 - y0), area});
  }

  std::vector<RegionProposal> proposals;
  proposals.reserve(kept.size());
  for (const auto &component : kept) {
    proposals.push_back({component.box.x, component.box.y, component.box.width, component.box.height,
                         static_cast<double>(component.area) / static_cast<double>(largest)});
  }
  sort_proposals(proposals);
  return proposals;
}

ProposalMap load_external_proposals(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::MissingFile, "proposal file not found: " + path.string());
  }
  ProposalMap proposals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv_line(line);
    if (fields.size() == 1 && fields[0].empty()) {
      continue;
    }
    if (line_no == 1 && !fields.empty() && fields[0] == "image_id") {
      continue;
    }
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (fields.size() != 6 || fields[0].empty()) {
      fail(ErrorCode::MalformedProposalFile, where + ": expected image_id,score,x,y,w,h");
    }
    RegionProposal p;
    p.score = parse_number<double>(fields[1], where);
    p.x = parse_number<int>(fields[2], where);
    p.y = parse_number<int>(fields[3], where);
    p.w = parse_number<int>(fields[4], where);
    p.h = parse_number<int>(fields[5], where);
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      fail(ErrorCode::MalformedProposalFile, where + ": score outside [0,1]");
    }
    if (!is_valid_proposal(p)) {
      fail(ErrorCode::OutOfBoundsBox, where + ": box violates canonical-frame bounds or 32 px minimum");
    }
    proposals[fields[0]].push_back(p);
  }
  for (auto &[id, list] : proposals) {
    sort_proposals(list);
  }
  return proposals;
}

void write_proposals(const std::filesystem::path &path, const ProposalMap &proposals) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write proposal file: " + path.string());
  }
  out << "image_id,score,x,y,w,h\n" << std::setprecision(17);
  for (const auto &[id, list] : proposals) {
    for (const auto &p : list) {
      out << id << ',' << p.score << ',' << p.x << ',' << p.y << ',' << p.w << ',' << p.h << '\n';
    }
  }
}

DensityProposer::DensityProposer(ProposerConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::vector<RegionProposal> DensityProposer::propose(const std::string &,
                                                     const cv::Mat &canonical) const {
  return propose_regions(canonical, config_);
}

std::vector<RegionProposal> ExternalFileProposer::propose(const std::string &image_id,
                                                          const cv::Mat &canonical) const {
  require_canonical(canonical, "ExternalFileProposer");
  const auto it = proposals_.find(image_id);
  return it == proposals_.end() ? std::vector<RegionProposal>{} : it->second;
}

std::unique_ptr<RegionProposer> make_proposer(const ProposerConfig &config) {
  config.validate();
  if (config.backend == ProposerBackend::EXTERNAL_FILE) {
    return std::make_unique<ExternalFileProposer>(load_external_proposals(config.external_file));
  }
  return std::make_unique<DensityProposer>(config);
}

} // namespace thyrofna
