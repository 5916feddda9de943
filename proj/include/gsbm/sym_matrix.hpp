#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace gsbm {

/// Dense real symmetric matrix. Storage is a full n*n row-major buffer in
/// which the lower triangle always mirrors the upper one, so the buffer
/// can be handed to column-major linear algebra unchanged.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  /// Builds a matrix from `upper(i, j)` evaluated for every i <= j.
  template <typename F>
  static SymMatrix from_upper(std::size_t n, F&& upper) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) m.set(i, j, upper(i, j));
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  /// Writes entry (i, j) and its mirror (j, i).
  void set(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * n_, n_};
  }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;
  bool exactly_symmetric() const noexcept;
  double trace() const noexcept;
  double frobenius_norm() const noexcept;

  /// y = A x
  std::vector<double> multiply(std::span<const double> x) const;

  /// this + c * v v^T
  SymMatrix plus_rank_one(double c, std::span<const double> v) const;

  bool operator==(const SymMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Flat binary format: n as a little-endian uint64, followed by the
/// n(n+1)/2 upper-triangle entries (row-major, i <= j) as little-endian
/// IEEE-754 doubles.
void write_binary(const SymMatrix& m, std::ostream& out);
SymMatrix read_binary(std::istream& in);

/// One matrix row per line, comma separated, 17 significant digits.
void write_csv(const SymMatrix& m, std::ostream& out, int precision = 17);

void write_binary_file(const SymMatrix& m, const std::filesystem::path& path);
SymMatrix read_binary_file(const std::filesystem::path& path);

}  // namespace gsbm
