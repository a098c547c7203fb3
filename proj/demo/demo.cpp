// Small tour: the standard contact form on S3, its open book given by z1,
// and one Dehn twist of the unit disk cotangent bundle of S1.

#include <cmath>
#include <cstdio>

#include "obv/catalog.hpp"
#include "obv/monodromy.hpp"

using namespace obv;
using catalog::standard_g1;

int main() {
  const RepresentationData rep = standard_g1(2);

  const auto points = sample(rep.contact.manifold, 500, 1);
  const CheckReport contact = verify_contact(rep.contact, points, 1e-3);
  std::printf("%s: min margin %.6f over %zu points, %s\n", contact.name.c_str(), *contact.min_margin,
              contact.n_samples, contact.pass ? "pass" : "fail");

  const auto on = sample(binding(rep), 50, 2);
  const DefiningFunction f = rep.f;
  const auto off = sample_where(rep.contact.manifold, 500, 3, [&f](const Vec& x) { return std::abs(f(x)) >= 1e-3; });
  const CheckReport adapted = verify_adapted(rep.contact, rep.f, off, on, 1e-3);
  std::printf("%s: min margin %.6f, %s\n", adapted.name.c_str(), *adapted.min_margin, adapted.pass ? "pass" : "fail");

  const Vec p = points.front();
  const Vec R = reeb_field(rep.contact, p);
  std::printf("Reeb field at (%.3f, %.3f, %.3f, %.3f): (%.3f, %.3f, %.3f, %.3f)\n", p[0], p[1], p[2], p[3], R[0], R[1],
              R[2], R[3]);

  const DehnTwistData twist = standard_twist();
  Vec q(2), fiber(2);
  q << 1.0, 0.0;
  fiber << 0.0, 0.5;
  const auto [q1, p1] = dehn_twist(twist, q, fiber);
  std::printf("Dehn twist of q = (1, 0), p = (0, 0.5): q = (%.6f, %.6f), p = (%.6f, %.6f), |p| = %.6f\n", q1[0], q1[1],
              p1[0], p1[1], p1.norm());
  return contact.pass && adapted.pass ? 0 : 1;
}
