#include "qsigma/sigma_schedule.hpp"

#include <cmath>
#include <sstream>

#include "qsigma/types.hpp"

namespace qsigma {

namespace {
void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation(std::string(what) + " must lie in [0, 1]");
}
}  // namespace

SigmaSchedule SigmaSchedule::constant(double sigma) {
  check_unit(sigma, "sigma");
  return SigmaSchedule(Kind::constant, sigma, 1.0);
}

SigmaSchedule SigmaSchedule::episode_decay(double initial, double factor) {
  check_unit(initial, "initial sigma");
  if (!(factor > 0.0 && factor <= 1.0)) throw ContractViolation("sigma decay factor must lie in (0, 1]");
  return SigmaSchedule(Kind::episode_decay, initial, factor);
}

SigmaSchedule SigmaSchedule::custom(std::function<double()> draw) {
  if (!draw) throw ContractViolation("custom sigma schedule needs a generator");
  SigmaSchedule s(Kind::custom, 0.0, 1.0);
  s.draw_ = std::move(draw);
  return s;
}

double SigmaSchedule::next() {
  if (kind_ == Kind::custom) {
    const double v = draw_();
    check_unit(v, "sigma");
    value_ = v;
  }
  return value_;
}

void SigmaSchedule::on_episode_end() {
  ++episodes_;
  if (kind_ == Kind::episode_decay)
    value_ = initial_ * std::pow(factor_, static_cast<double>(episodes_));
}

std::string SigmaSchedule::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant: os << "sigma=" << initial_; break;
    case Kind::episode_decay: os << "sigma=" << initial_ << "*" << factor_ << "^episode"; break;
    case Kind::custom: os << "sigma=custom"; break;
  }
  return os.str();
}

}  // namespace qsigma
