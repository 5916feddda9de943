#include "gsbm/sym_matrix.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>

#include "gsbm/error.hpp"
#include "gsbm/format.hpp"

namespace gsbm {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int k = 0; k < 8; ++k) r = (r << 8) | ((v >> (8 * k)) & 0xffu);
    return r;
  }
  return v;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.write(buf, 8);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
  char buf[8];
  if (!in.read(buf, 8)) return false;
  std::memcpy(&v, buf, 8);
  v = to_little(v);
  return true;
}

}  // namespace

bool SymMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool SymMatrix::exactly_symmetric() const noexcept {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (data_[i * n_ + j] != data_[j * n_ + i]) return false;
    }
  }
  return true;
}

double SymMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i];
  return t;
}

double SymMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

std::vector<double> SymMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw ValidationError("dimension mismatch in matrix-vector product");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* r = data_.data() + i * n_;
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

SymMatrix SymMatrix::plus_rank_one(double c, std::span<const double> v) const {
  if (v.size() != n_) throw ValidationError("dimension mismatch in rank-one update");
  SymMatrix out = *this;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) out.set(i, j, (*this)(i, j) + c * v[i] * v[j]);
  }
  return out;
}

void write_binary(const SymMatrix& m, std::ostream& out) {
  const std::size_t n = m.size();
  put_u64(out, static_cast<std::uint64_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) put_u64(out, std::bit_cast<std::uint64_t>(m(i, j)));
  }
}

SymMatrix read_binary(std::istream& in) {
  std::uint64_t n = 0;
  if (!get_u64(in, n)) throw IoError("truncated matrix header");
  if (n > (1u << 20)) throw IoError("matrix dimension in header is implausibly large");
  SymMatrix m(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::uint64_t bits = 0;
      if (!get_u64(in, bits)) throw IoError("truncated matrix body");
      m.set(i, j, std::bit_cast<double>(bits));
    }
  }
  return m;
}

void write_csv(const SymMatrix& m, std::ostream& out, int precision) {
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << format_number(m(i, j), precision);
    }
    out << '\n';
  }
}

void write_binary_file(const SymMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_binary(m, out);
  if (!out) throw IoError("write failed: " + path.string());
}

SymMatrix read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_binary(in);
}

}  // namespace gsbm
