#include "freemix/ensembles.hpp"

namespace freemix {

namespace {

void check_dim(Index m) {
  if (m < 1) throw std::invalid_argument("matrix dimension must be >= 1");
}

}  // namespace

double haar_fourth_moment(Index m, int beta) {
  check_dim(m);
  check_beta(beta);
  const double md = static_cast<double>(m);
  const double b = beta;
  return (b + 2.0) / (md * (md * b + 2.0));
}

double haar_ipr_closed(Index m, int beta) {
  check_dim(m);
  check_beta(beta);
  const double md = static_cast<double>(m);
  const double b = beta;
  return (md - 1.0) * b / (md * b + 2.0);
}

HaarCrossMoments haar_cross_moments(Index m, int beta) {
  check_dim(m);
  check_beta(beta);
  const double md = static_cast<double>(m);
  const double b = beta;
  const double base = md * (md * b + 2.0);
  return {b / base, m == 1 ? 0.0 : -b / (base * (md - 1.0))};
}

}  // namespace freemix
