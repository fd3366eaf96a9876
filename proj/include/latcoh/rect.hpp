#pragma once
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace latcoh {

// Axis-aligned box of lattice points {l : lo <= l <= hi componentwise}.
// All finite windows (weight tables, cube complexes, path searches) live on
// one of these.
struct Rect {
  IntegerCycle lo, hi;

  size_t dim() const { return lo.size(); }

  bool contains(const IntegerCycle& l) const {
    return l.size() == lo.size() && cyc_le(lo, l) && cyc_le(l, hi);
  }

  Int point_count() const {
    Int n = 1;
    for (size_t i = 0; i < lo.size(); ++i) n *= hi[i] - lo[i] + 1;
    return n;
  }
};

inline Rect make_rect(IntegerCycle lo, IntegerCycle hi) {
  if (lo.size() != hi.size())
    throw input_error("rectangle corners have different lengths");
  for (size_t i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i])
      throw input_error("empty rectangle: lo > hi in coordinate " +
                        std::to_string(i));
  return Rect{std::move(lo), std::move(hi)};
}

// Machine-indexed view of a Rect: a bijection between its lattice points and
// {0, ..., total-1}, row-major with the last coordinate fastest.  Construction
// fails (resource_error) when the box exceeds the caller's point budget, so
// hot loops can use plain size_t arithmetic afterwards.
class RectIdx {
 public:
  RectIdx(const Rect& r, size_t max_points) : lo_(r.lo) {
    size_t d = r.dim();
    ext_.resize(d);
    stride_.resize(d);
    Int total = 1;
    for (size_t i = 0; i < d; ++i) {
      total *= r.hi[i] - r.lo[i] + 1;
      ext_[i] = to_ll(r.hi[i] - r.lo[i] + 1, "rectangle extent");
    }
    if (total > Int(max_points))
      throw resource_error("rectangle holds " + total.str() +
                           " lattice points, over the budget of " +
                           std::to_string(max_points));
    total_ = static_cast<size_t>(to_ll(total, "rectangle size"));
    size_t s = 1;
    for (size_t i = d; i-- > 0;) {
      stride_[i] = s;
      s *= static_cast<size_t>(ext_[i]);
    }
  }

  size_t total() const { return total_; }
  size_t dim() const { return ext_.size(); }
  long long extent(size_t axis) const { return ext_[axis]; }
  size_t stride(size_t axis) const { return stride_[axis]; }

  // Coordinates relative to the lower corner.
  std::vector<long long> rel(size_t idx) const {
    std::vector<long long> c(ext_.size());
    for (size_t i = 0; i < ext_.size(); ++i) {
      c[i] = static_cast<long long>(idx / stride_[i]) % ext_[i];
    }
    return c;
  }

  size_t index_rel(const std::vector<long long>& c) const {
    size_t idx = 0;
    for (size_t i = 0; i < c.size(); ++i)
      idx += static_cast<size_t>(c[i]) * stride_[i];
    return idx;
  }

  IntegerCycle point(size_t idx) const {
    auto c = rel(idx);
    IntegerCycle p(lo_);
    for (size_t i = 0; i < p.size(); ++i) p[i] += c[i];
    return p;
  }

  size_t index(const IntegerCycle& p) const {
    size_t idx = 0;
    for (size_t i = 0; i < p.size(); ++i)
      idx += static_cast<size_t>(to_ll(p[i] - lo_[i], "rectangle offset")) *
             stride_[i];
    return idx;
  }

  // Index of p + E_axis given the index of p; the caller guarantees that the
  // neighbour stays inside the box.
  size_t step(size_t idx, size_t axis) const { return idx + stride_[axis]; }

 private:
  IntegerCycle lo_;
  std::vector<long long> ext_;
  std::vector<size_t> stride_;
  size_t total_ = 0;
};

}  // namespace latcoh
