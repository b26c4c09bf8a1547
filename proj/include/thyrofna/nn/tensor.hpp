#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace thyrofna {
class Rng;
}

namespace thyrofna::nn {

// Row-major so that each channel of a feature map is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// channels x (height*width); vectors are stored as channels x 1.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  Matrix data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w), data(Matrix::Zero(c, h * w)) {}

  static FeatureMap from_vector(const Vector &v);
  Vector as_vector() const;
  int spatial() const { return height * width; }
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

struct ForwardContext {
  bool training = false;
  Rng *rng = nullptr; // required when training with dropout
};

void zero_grads(const std::vector<Parameter *> &params);
std::size_t count_parameters(const std::vector<Parameter *> &params);

// He-uniform style initialisation with the given fan-in.
void init_uniform(Matrix &m, double bound, Rng &rng);

// Binary parameter blob: magic, count, then (name, rows, cols, doubles) per entry.
void save_parameters(std::ostream &out, const std::vector<Parameter *> &params);
void load_parameters(std::istream &in, const std::vector<Parameter *> &params);
void copy_parameters(const std::vector<Parameter *> &from, const std::vector<Parameter *> &to);

} // namespace thyrofna::nn
