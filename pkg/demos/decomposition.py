"""Split a random maximally monotone structure into Dirac and resistive parts.

The split is checked by composing the parts back together and comparing
subspaces. The reduced split uses a resistive pair whose size equals the rank
of the dissipative part.
"""
import numpy as np

from phstruct import compose, defect_spaces, split_dirac_resistive, subspace_equal
from phstruct.randomgen import random_maximal_monotone
from phstruct.structures import PairingLayout


def main(seed=7):
    rng = np.random.default_rng(seed)
    layout = PairingLayout((("x", 3), ("P", 1)))
    M = random_maximal_monotone(layout, rng, m=1)
    print(M)

    d = defect_spaces(M)
    print(f"defect spaces: dim F0 = {d.F0.shape[1]}, dim E1 = {d.E1.shape[1]}, "
          f"angle(F0, E1 perp) = {d.angle_F:.1e}")

    for reduce in (False, True):
        pair = split_dirac_resistive(M, reduce=reduce)
        back = compose(pair.D, pair.Rres, shared=pair.resistive_name)
        same = subspace_equal(back.basis, M.basis)
        print(f"reduce={reduce}: resistive size {pair.R_res.shape[0]}, "
              f"rank of dissipation {np.linalg.matrix_rank(pair.R_res)}, recomposed equal: {same}")


if __name__ == "__main__":
    main()
