"""Random generators of structurally valid problems."""

import random
from fractions import Fraction

from momentsum.dsl import ProblemSpec


def random_equation(rng: random.Random):
    kappa = rng.randint(1, 4)
    s1 = Fraction(rng.randint(1, 6), rng.randint(1, 4))
    s2 = Fraction(rng.randint(1, 6), rng.randint(1, 4))
    lo = int(kappa * s1 / s2) + 1
    pk = rng.randint(lo, lo + 5)
    terms = [f"({rng.randint(1, 5)}) Dti[{kappa}] Dz[{pk}] u"]
    for i in range(1, kappa):
        if rng.random() < 0.6:
            pi = rng.randint(0, (i * pk) // kappa)
            terms.append(f"({rng.randint(-5, 5) or 1} + z) Dti[{i}] Dz[{pi}] u")
    return "u - " + " - ".join(terms) + " = f", s1, s2


def random_spec(rng: random.Random, **kw) -> ProblemSpec:
    eq, s1, s2 = random_equation(rng)
    return ProblemSpec.build(eq, s1=s1, s2=s2, **kw)
