#ifndef TAUSFDE_FFT_HPP
#define TAUSFDE_FFT_HPP

// Thin RAII layer over FFTW complex transforms. Plans are created once per
// (shape, batch, direction) under a global lock and executed through the
// new-array interface, so execution is safe from several threads as long as
// each thread uses its own buffers.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

namespace tausfde::fft {

enum class Direction { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

/// FFTW-aligned complex scratch array.
class ComplexBuffer {
public:
  ComplexBuffer() = default;
  explicit ComplexBuffer(std::size_t n) { resize(n); }

  void resize(std::size_t n) {
    if (n <= capacity_) {
      size_ = n;
      return;
    }
    data_.reset(fftw_alloc_complex(n));
    if (!data_) throw std::bad_alloc();
    capacity_ = size_ = n;
  }

  std::size_t size() const { return size_; }
  fftw_complex* raw() { return data_.get(); }
  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_.get()); }
  std::complex<double>& operator[](std::size_t i) { return data()[i]; }

private:
  std::unique_ptr<fftw_complex, FftwFree> data_;
  std::size_t capacity_ = 0;
  std::size_t size_ = 0;
};

namespace detail {

using PlanKey = std::tuple<std::vector<int>, int, int>;

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline std::map<PlanKey, fftw_plan>& plan_cache() {
  static std::map<PlanKey, fftw_plan> cache;
  return cache;
}

/// Plan for `howmany` contiguous transforms of FFTW row-major shape `dims`.
inline fftw_plan plan_for(const std::vector<int>& dims, int howmany, Direction dir) {
  std::lock_guard lock(planner_mutex());
  auto& cache = plan_cache();
  PlanKey key{dims, howmany, static_cast<int>(dir)};
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  int dist = 1;
  for (int d : dims) dist *= d;
  ComplexBuffer in(static_cast<std::size_t>(dist) * howmany);
  ComplexBuffer out(static_cast<std::size_t>(dist) * howmany);
  fftw_plan plan = fftw_plan_many_dft(static_cast<int>(dims.size()), dims.data(), howmany, in.raw(),
                                      nullptr, 1, dist, out.raw(), nullptr, 1, dist,
                                      static_cast<int>(dir), FFTW_ESTIMATE);
  cache.emplace(std::move(key), plan);
  return plan;
}

}  // namespace detail

/// `howmany` unnormalized 1-D DFTs of length n, stored back to back. in != out.
inline void transform_batch(std::size_t n, std::size_t howmany, Direction dir, ComplexBuffer& in,
                            ComplexBuffer& out) {
  fftw_plan plan = detail::plan_for({static_cast<int>(n)}, static_cast<int>(howmany), dir);
  fftw_execute_dft(plan, in.raw(), out.raw());
}

/// Unnormalized multi-dimensional DFT of a grid stored first-dimension-fastest.
inline void transform_grid(const std::vector<std::size_t>& dims, Direction dir, ComplexBuffer& in,
                           ComplexBuffer& out) {
  // FFTW is row-major (last index fastest), so the dimension list is reversed.
  std::vector<int> rev(dims.rbegin(), dims.rend());
  fftw_plan plan = detail::plan_for(rev, 1, dir);
  fftw_execute_dft(plan, in.raw(), out.raw());
}

/// Per-thread scratch buffers.
struct Workspace {
  ComplexBuffer a;
  ComplexBuffer b;
  std::vector<double> real;

  static Workspace& local() {
    thread_local Workspace ws;
    return ws;
  }
};

}  // namespace tausfde::fft

#endif  // TAUSFDE_FFT_HPP
