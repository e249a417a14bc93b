#include "mwsmpc/rng.hpp"

namespace mwsmpc {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

RandomStream::RandomStream(const StreamId& id) : id_(id) {
  std::uint64_t k = splitmix64(id.seed + kGolden);
  k = splitmix64(k ^ (id.mission + 0x632BE59BD9B4E019ULL));
  k = splitmix64(k ^ (id.step + 0x8CB92BA72F3D8DD7ULL));
  key_ = splitmix64(k ^ static_cast<std::uint64_t>(id.purpose));
}

void RandomStream::fill_normal(Eigen::Ref<Eigen::MatrixXd> out) {
  // column-major order
  if (out.outerStride() == out.rows()) {
    double* p = out.data();
    for (Eigen::Index i = 0; i < out.size(); ++i) p[i] = normal();
    return;
  }
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal();
}

}  // namespace mwsmpc
