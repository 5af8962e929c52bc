"""Certifying the inequalities behind the step-size rules.

Every step-size policy in this package leans on a small set of
inequalities: a quartic descent bound, envelopes for the sampled
gradients, the transform-energy bound for the bilinear form, and a local
smoothness estimate for the gradient.  Each has an independent checker
that samples random points and reports the worst normalized slack; the
analytic gradient itself is certified against central differences.

The same suite is available on the command line:

    blindptycho verify --suite all --samples 100
"""

from blindptycho import (Rng, ShiftSet, check_bilinear_bound,
                         check_descent_lemma, check_gradient_bounds,
                         check_gradient_fd, check_lipschitz,
                         check_unbiasedness, synthesize_problem)

problem = synthesize_problem(8, seed=1, epsilon=1e-3)
rng = Rng(2)
reports = []

reports.append(check_gradient_fd(problem, 10, rng))
for scale in (0.1, 1.0, 10.0):
    reports.append(check_descent_lemma(problem, 200, scale, rng))

point = (rng.complex_normal_vector(8), rng.complex_normal_vector(8))
reports.append(check_unbiasedness(problem, *point))
reports.append(check_gradient_bounds(problem, 100, rng))

for mode in ("circular", "zero-padded"):
    reports.append(check_bilinear_bound(8, ShiftSet.all_shifts(8, mode), 25, rng))

for eps in (1e-2, 1e-6):
    rough = synthesize_problem(8, seed=3, epsilon=eps)
    reports.append(check_lipschitz(rough, 100, rng))

width = max(len(r.name) for r in reports)
for r in reports:
    flag = "pass" if r.passed else "FAIL"
    print(f"{flag}  {r.name:<{width}}  samples={r.samples:<4d} "
          f"worst_slack={r.worst_slack:+.3e}")

failed = [r for r in reports if not r.passed]
print(f"\n{len(reports) - len(failed)}/{len(reports)} checks passed")
