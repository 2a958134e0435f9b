#include "aslpv/builtin_examples.h"

#include <cmath>

#include "aslpv/errors.h"

namespace aslpv::examples {

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index k = 0;
    for (double v : row) m(i, k++) = v;
    ++i;
  }
  return m;
}

void check_index(int k) {
  if (k < 1 || k > kCount) {
    throw DomainError("built-in examples are numbered 1.." +
                      std::to_string(kCount));
  }
}

}  // namespace

SchedulingSpec scheduling() { return SchedulingSpec(ConstantPlusWhite{{1.5}}); }

SchedulingSpec scheduling_prime() {
  return SchedulingSpec(ConstantPlusWhite{{std::sqrt(3.0)}});
}

AsLpvSsa system(int k) {
  check_index(k);
  AsLpvSsa s;
  const auto p = scheduling().p();
  s.F = mat({{1.0}});
  s.Q = {p[0] * mat({{1.0}}), p[1] * mat({{1.0}})};
  if (k == 1) {
    s.A = {mat({{0.4, 0.4, 0.0}, {0.2, 0.1, 0.0}, {0.0, 0.0, 0.2}}),
           mat({{0.1, 0.1, 0.0}, {0.2, 0.3, 0.0}, {0.0, 0.0, 0.2}})};
    s.K = {mat({{0.0}, {1.0}, {1.0}}), mat({{0.0}, {1.0}, {1.0}})};
    s.C = mat({{10.0, 0.0, 0.0}});
    return s;
  }
  s.A = {mat({{0.4, 0.4}, {0.2, 0.1}}), mat({{0.1, 0.1}, {0.2, 0.3}})};
  s.K = {mat({{0.0}, {1.0}}), mat({{0.0}, {1.0}})};
  s.C = k == 2 ? mat({{10.0, 0.0}}) : mat({{1.0, 0.0}});
  return s;
}

DLpvSsa reference_minimal(int k) {
  check_index(k);
  DLpvSsa d;
  d.D = mat({{1.0}});
  switch (k) {
    case 1:
      d.A = {mat({{0.4007, 0.3997}, {0.1997, 0.0993}}),
             mat({{0.1003, 0.1002}, {0.2002, 0.2997}})};
      d.B = {mat({{-0.046}, {-0.0541}}), mat({{-0.0116}, {-0.0578}})};
      d.C = mat({{-10.0, 0.0116}});
      break;
    case 2:
      d.A = {mat({{0.4007, -0.3997}, {-0.1997, 0.0993}}),
             mat({{0.1003, -0.1002}, {-0.2002, 0.2997}})};
      d.B = {mat({{-0.046}, {0.0541}}), mat({{-0.0116}, {0.0578}})};
      d.C = mat({{-10.0, -0.0116}});
      break;
    default:
      d.A = {mat({{0.4642, -0.3581}, {-0.1581, 0.0358}}),
             mat({{0.1367, -0.1188}, {-0.2188, 0.2633}})};
      d.B = {mat({{-0.1143}, {0.9934}}), mat({{-0.1143}, {0.9934}})};
      d.C = mat({{-0.9934, -0.1143}});
      break;
  }
  return d;
}

Matrix reference_isomorphism() {
  return mat({{-0.9934, -0.1143}, {-0.1143, 0.9934}});
}

}  // namespace aslpv::examples
