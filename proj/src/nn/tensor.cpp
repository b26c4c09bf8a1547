#include "thyrofna/nn/tensor.hpp"

#include "thyrofna/error.hpp"
#include "thyrofna/rng.hpp"

#include <cstdint>
#include <istream>
#include <ostream>

namespace thyrofna::nn {

namespace {

constexpr std::uint32_t kMagic = 0x4e4e4654; // "TFNN"

template <typename T> void write_pod(std::ostream &out, const T &value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T> T read_pod(std::istream &in) {
  T value{};
  in.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (!in) {
    fail(ErrorCode::IoFailure, "truncated parameter file");
  }
  return value;
}

} // namespace

FeatureMap FeatureMap::from_vector(const Vector &v) {
  FeatureMap fm(static_cast<int>(v.size()), 1, 1);
  fm.data.col(0) = v;
  return fm;
}

Vector FeatureMap::as_vector() const {
  return Eigen::Map<const Vector>(data.data(), data.size());
}

void zero_grads(const std::vector<Parameter *> &params) {
  for (auto *p : params) {
    p->zero_grad();
  }
}

std::size_t count_parameters(const std::vector<Parameter *> &params) {
  std::size_t total = 0;
  for (const auto *p : params) {
    total += static_cast<std::size_t>(p->value.size());
  }
  return total;
}

void init_uniform(Matrix &m, double bound, Rng &rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-bound, bound);
  }
}

void save_parameters(std::ostream &out, const std::vector<Parameter *> &params) {
  write_pod(out, kMagic);
  write_pod(out, static_cast<std::uint32_t>(params.size()));
  for (const auto *p : params) {
    write_pod(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod(out, static_cast<std::int64_t>(p->value.rows()));
    write_pod(out, static_cast<std::int64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char *>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p->value.size())));
  }
  if (!out) {
    fail(ErrorCode::IoFailure, "failed writing parameters");
  }
}

void load_parameters(std::istream &in, const std::vector<Parameter *> &params) {
  if (read_pod<std::uint32_t>(in) != kMagic) {
    fail(ErrorCode::CheckpointMismatch, "not a parameter file");
  }
  const auto count = read_pod<std::uint32_t>(in);
  if (count != params.size()) {
    fail(ErrorCode::CheckpointMismatch, "parameter count mismatch: file has " + std::to_string(count) +
                                            ", model expects " + std::to_string(params.size()));
  }
  for (auto *p : params) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::int64_t>(in);
    const auto cols = read_pod<std::int64_t>(in);
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      fail(ErrorCode::CheckpointMismatch, "parameter '" + name + "' does not match '" + p->name + "'");
    }
    in.read(reinterpret_cast<char *>(p->value.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p->value.size())));
    if (!in) {
      fail(ErrorCode::IoFailure, "truncated parameter file");
    }
  }
}

void copy_parameters(const std::vector<Parameter *> &from, const std::vector<Parameter *> &to) {
  if (from.size() != to.size()) {
    fail(ErrorCode::ShapeMismatch, "parameter lists differ in length");
  }
  for (std::size_t i = 0; i < from.size(); ++i) {
    to[i]->value = from[i]->value;
  }
}

} // namespace thyrofna::nn
