"""Transfer function of a constrained system along the imaginary axis.

The multipliers are eliminated to give an explicit system, and both routes
are evaluated on the same grid. A sampled positive-real check runs at the end.
"""
import numpy as np

from phstruct import eliminate_multipliers, positive_real_sample_check, transfer_eval
from phstruct.randomgen import random_pd_structured


def main(seed=3):
    rng = np.random.default_rng(seed)
    sr = random_pd_structured(4, 1, rng, m=1)
    ex = eliminate_multipliers(sr)
    res = ex.projection_residuals()
    print("projection residuals:", ", ".join(f"{k} {v:.1e}" for k, v in res.items()))

    print(f"{'omega':>8} {'|H| descriptor':>16} {'|H| explicit':>14}")
    for omega in np.logspace(-2, 2, 9):
        s = 1j * omega
        hd = transfer_eval(sr, s)
        he = transfer_eval(ex, s)
        print(f"{omega:8.3f} {abs(hd[0, 0]):16.6f} {abs(he[0, 0]):14.6f}")

    samples = [complex(a, b) for a in (0.01, 1.0, 10.0) for b in np.linspace(-10, 10, 7)]
    print(positive_real_sample_check(sr, samples).summary())


if __name__ == "__main__":
    main()
