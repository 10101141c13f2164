#ifndef OBSOLIB_KAHAN_HPP
#define OBSOLIB_KAHAN_HPP

namespace obsolib {

// Kahan compensated accumulator.  The profile likelihood has to resolve
// score values near 1e-9 from tens of thousands of terms, which plain
// summation cannot do reliably.
class KahanSum {
public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }

  double value() const { return s_; }

private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace obsolib

#endif
