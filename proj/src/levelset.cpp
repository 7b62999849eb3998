#include "stfem/levelset.hpp"

#include <algorithm>
#include <cmath>

namespace stfem {

double MovingDiskComplement::value(const Coord& x, double t) const {
  const double dx = x[0] - (c0_[0] + v_[0] * t);
  const double dy = x[1] - (c0_[1] + v_[1] * t);
  return r_ - std::hypot(dx, dy);
}

double MovingSquareComplement::value(const Coord& x, double t) const {
  const double dx = std::abs(x[0] - (c0_[0] + v_[0] * t));
  const double dy = std::abs(x[1] - (c0_[1] + v_[1] * t));
  return a_ - std::max(dx, dy);
}

double MovingDisk::value(const Coord& x, double t) const {
  const double dx = x[0] - (c0_[0] + v_[0] * t);
  const double dy = x[1] - (c0_[1] + v_[1] * t);
  return std::hypot(dx, dy) - r_;
}

double MinLevelSet::value(const Coord& x, double t) const {
  return std::min(a_->value(x, t), b_->value(x, t));
}

double MaxLevelSet::value(const Coord& x, double t) const {
  return std::max(a_->value(x, t), b_->value(x, t));
}

std::shared_ptr<const LevelSetField> make_two_disk_union(const Coord& c1, const Coord& v1,
                                                         const Coord& c2, const Coord& v2,
                                                         double radius) {
  auto d1 = std::make_shared<MovingDisk>(c1, v1, radius);
  auto d2 = std::make_shared<MovingDisk>(c2, v2, radius);
  return std::make_shared<MinLevelSet>(d1, d2);
}

}  // namespace stfem
