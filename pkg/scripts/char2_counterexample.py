"""Closed hyperplanes of g(4, F_2), which is the group algebra of (Z/2)^4.

Over F_2 the signs disappear, so e_A e_B = e_{A xor B}.  The closed hyperplanes
are the augmentation ideal (coefficients summing to zero) and, for each nonempty
S, the kernel of the functional summing the coefficients of e_A with |A & S| odd.
"""

from __future__ import annotations

from cliffcheck import check_subspace, family_by_number, prove_no_subalgebra
from cliffcheck.blades import all_blades, render_blade
from cliffcheck.scan import field_multivector, scan


def main():
    rep = scan(2, progress=False)
    print(f"{len(rep.closed)} closed hyperplanes out of {rep.examined}")
    names = [render_blade(b) for b in all_blades(4)]
    for phi in rep.closed:
        support = " + ".join(names[i] for i, c in enumerate(phi.coords) if c)
        print(f"  kernel of phi = {support}")

    # augmentation ideal: span of 1 + e_A for every nonempty A
    aug = [field_multivector([1] + [int(j == i) for j in range(1, 16)], 2) for i in range(1, 16)]
    print("augmentation ideal closed:", check_subspace(aug, 2))

    for number in (1, 4):
        trace = prove_no_subalgebra(family_by_number(number), 2)
        sols = [leaf.assignment for leaf in trace.leaves if leaf.verdict == "SolutionFound"]
        print(f"family {number}: engine verdict {trace.verdict}, first solution {sols[0] if sols else None}")


if __name__ == "__main__":
    main()
