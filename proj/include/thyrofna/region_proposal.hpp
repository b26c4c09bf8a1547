#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace thyrofna {

inline constexpr int kMinProposalSide = 32;

// Scored box in the 1024x768 canonical frame.
struct RegionProposal {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double score = 0.0;

  cv::Rect rect() const { return {x, y, w, h}; }
  bool operator==(const RegionProposal &) const = default;
};

bool is_valid_proposal(const RegionProposal &p);

// Total order: score desc, then box area desc, then x asc, then y asc.
bool proposal_before(const RegionProposal &a, const RegionProposal &b);
void sort_proposals(std::vector<RegionProposal> &proposals);

enum class ProposerBackend { DENSITY_DEFAULT, EXTERNAL_FILE };

struct ProposerConfig {
  ProposerBackend backend = ProposerBackend::DENSITY_DEFAULT;
  // Gaussian kernel applied before thresholding so that dense groups of
  // nuclei merge into one cluster. 1 disables blurring.
  int blur_kernel = 15;
  // Pixels darker than median(gray) - threshold_offset count as stain.
  double threshold_offset = 40.0;
  // Stand-in for the ">= 10 cells" cluster criterion.
  int min_cluster_area = 4096;
  int margin = 8;
  std::filesystem::path external_file;

  void validate() const;
};

// Default density backend: blur, adaptive dark threshold, 8-connected
// components, area filter, dilated and clamped bounding boxes.
std::vector<RegionProposal> propose_regions(const cv::Mat &canonical, const ProposerConfig &config);

using ProposalMap = std::map<std::string, std::vector<RegionProposal>>;

// CSV `image_id,score,x,y,w,h` (optional header). Each image's list is sorted.
ProposalMap load_external_proposals(const std::filesystem::path &path);

void write_proposals(const std::filesystem::path &path, const ProposalMap &proposals);

// Pluggable detector used by the augmentation stage.
class RegionProposer {
public:
  virtual ~RegionProposer() = default;
  virtual std::vector<RegionProposal> propose(const std::string &image_id,
                                              const cv::Mat &canonical) const = 0;
};

class DensityProposer final : public RegionProposer {
public:
  explicit DensityProposer(ProposerConfig config);
  std::vector<RegionProposal> propose(const std::string &image_id,
                                      const cv::Mat &canonical) const override;

private:
  ProposerConfig config_;
};

class ExternalFileProposer final : public RegionProposer {
public:
  explicit ExternalFileProposer(ProposalMap proposals) : proposals_(std::move(proposals)) {}
  std::vector<RegionProposal> propose(const std::string &image_id,
                                      const cv::Mat &canonical) const override;

private:
  ProposalMap proposals_;
};

std::unique_ptr<RegionProposer> make_proposer(const ProposerConfig &config);

} // namespace thyrofna
