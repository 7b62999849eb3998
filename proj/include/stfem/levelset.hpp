#pragma once

#include <memory>

#include "stfem/mesh.hpp"

namespace stfem {

/// Implicit description of the moving domain. The sign convention is
/// fixed throughout: value(x,t) < 0 iff (x,t) lies inside the physical
/// space-time domain Q. Implementations must be evaluable concurrently.
class LevelSetField {
 public:
  virtual ~LevelSetField() = default;
  virtual double value(const Coord& x, double t) const = 0;
};

/// a . x + b + c t ; negative side is inside.
class HalfPlaneLevelSet final : public LevelSetField {
 public:
  HalfPlaneLevelSet(const Coord& normal, double offset, double t_slope = 0.0)
      : a_(normal), b_(offset), c_(t_slope) {}
  double value(const Coord& x, double t) const override {
    return a_[0] * x[0] + a_[1] * x[1] + b_ + c_ * t;
  }

 private:
  Coord a_;
  double b_, c_;
};

class ConstantLevelSet final : public LevelSetField {
 public:
  explicit ConstantLevelSet(double v) : v_(v) {}
  double value(const Coord&, double) const override { return v_; }

 private:
  double v_;
};

/// Complement of a disk-shaped hole travelling with constant velocity:
/// the domain is everything outside the disk. value = r - |x - c(t)|.
class MovingDiskComplement final : public LevelSetField {
 public:
  MovingDiskComplement(const Coord& center0, const Coord& velocity, double radius)
      : c0_(center0), v_(velocity), r_(radius) {}
  double value(const Coord& x, double t) const override;
  Coord center(double t) const {
    return {c0_[0] + v_[0] * t, c0_[1] + v_[1] * t};
  }

 private:
  Coord c0_, v_;
  double r_;
};

/// Complement of an axis-aligned square hole (half-width a) travelling
/// with constant velocity. value = a - max_i |x_i - c_i(t)|.
class MovingSquareComplement final : public LevelSetField {
 public:
  MovingSquareComplement(const Coord& center0, const Coord& velocity, double half_width)
      : c0_(center0), v_(velocity), a_(half_width) {}
  double value(const Coord& x, double t) const override;

 private:
  Coord c0_, v_;
  double a_;
};

/// A single moving disk as the domain itself (insides are inside):
/// value = |x - c(t)| - r.
class MovingDisk final : public LevelSetField {
 public:
  MovingDisk(const Coord& center0, const Coord& velocity, double radius)
      : c0_(center0), v_(velocity), r_(radius) {}
  double value(const Coord& x, double t) const override;
  Coord center(double t) const {
    return {c0_[0] + v_[0] * t, c0_[1] + v_[1] * t};
  }

 private:
  Coord c0_, v_;
  double r_;
};

/// min composition: union of the inside regions.
class MinLevelSet final : public LevelSetField {
 public:
  MinLevelSet(std::shared_ptr<const LevelSetField> a, std::shared_ptr<const LevelSetField> b)
      : a_(std::move(a)), b_(std::move(b)) {}
  double value(const Coord& x, double t) const override;

 private:
  std::shared_ptr<const LevelSetField> a_, b_;
};

/// max composition: intersection of the inside regions.
class MaxLevelSet final : public LevelSetField {
 public:
  MaxLevelSet(std::shared_ptr<const LevelSetField> a, std::shared_ptr<const LevelSetField> b)
      : a_(std::move(a)), b_(std::move(b)) {}
  double value(const Coord& x, double t) const override;

 private:
  std::shared_ptr<const LevelSetField> a_, b_;
};

/// Union of two disks travelling with opposite vertical velocities
/// (the topology-change benchmark geometry).
std::shared_ptr<const LevelSetField> make_two_disk_union(const Coord& c1, const Coord& v1,
                                                         const Coord& c2, const Coord& v2,
                                                         double radius);

}  // namespace stfem
