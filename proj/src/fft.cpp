#include "semiclassic/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace semiclassic::fft {
namespace {

struct PlanKey {
  std::vector<int> extents;
  int sign;
  int axis;  // -1 for the full transform
  bool operator<(const PlanKey& o) const {
    return std::tie(extents, sign, axis) < std::tie(o.extents, o.sign, o.axis);
  }
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t total = 1;
    for (int e : key.extents) total *= static_cast<std::size_t>(e);
    auto* scratch = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (key.axis < 0) {
      plan = fftw_plan_dft(static_cast<int>(key.extents.size()), key.extents.data(), scratch,
                           scratch, key.sign, flags);
    } else {
      int outer = 1, inner = 1;
      for (int a = 0; a < key.axis; ++a) outer *= key.extents[a];
      for (std::size_t a = key.axis + 1; a < key.extents.size(); ++a) inner *= key.extents[a];
      const int n = key.extents[key.axis];
      fftw_iodim dim{n, inner, inner};
      fftw_iodim loops[2] = {{outer, n * inner, n * inner}, {inner, 1, 1}};
      plan = fftw_plan_guru_dft(1, &dim, 2, loops, scratch, scratch, key.sign, flags);
    }
    fftw_free(scratch);
    if (!plan) throw ParameterError("fft: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void transform(Complex* data, std::span<const int> extents, int sign) {
  PlanKey key{std::vector<int>(extents.begin(), extents.end()), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, -1};
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(cache().get(key), p, p);
}

void transform_axis(Complex* data, std::span<const int> extents, int axis, int sign) {
  PlanKey key{std::vector<int>(extents.begin(), extents.end()), sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, axis};
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(cache().get(key), p, p);
}

}  // namespace semiclassic::fft
