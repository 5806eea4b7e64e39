"""Building the delta-coupled approximating graph.

The coupling is emulated by shrinking geometry: each outer edge is clipped
back by a half-length d, connected inner edges of length 2d bridge selected
pairs, and every vertex carries a plain delta potential whose strength is a
rational function of d.  Complex coupling data additionally requires
constant magnetic potentials on the inner edges.

The first section rebuilds the closed-form schedule of the symmetrized
delta-prime family and compares it entry by entry.  The second shows a
genuinely complex coupling, where the builder emits magnetic phases.  The
third provokes the one anticipated failure: a half-length where a pair
argument cancels exactly and no finite strength exists.
"""

import numpy as np

from qgraph import SingularDError, STForm, build_approx_graph, dumps, named_to_st
from qgraph import CouplingKind, NamedCoupling


def delta_prime_section():
    beta, n, d = 1.0, 3, 0.1
    st = named_to_st(NamedCoupling(kind=CouplingKind.DELTA_PRIME_S, n=n, beta=beta))
    g = build_approx_graph(st, d)
    print(f"--- delta-prime-s, beta={beta}, n={n}, d={d}")
    print(f"inner edges: {sorted(g.neighbors.pairs())}")
    print(f"closed form: w_pair = -beta/d^2 - 2/d = {-beta / d**2 - 2 / d:.6g}")
    print(f"             w_vert = (2-n)/beta - (n-1)/d = {(2 - n) / beta - (n - 1) / d:.6g}")
    print(f"built:       w_inner[(1, 2)] = {g.w_inner[(1, 2)]:.6g}")
    print(f"             w_vertex[1]     = {g.w_vertex[1]:.6g}")
    print()


def magnetic_section():
    st = STForm(
        n=3,
        m=2,
        perm=(1, 2, 3),
        S=np.array([[0.5, 0.3 - 0.2j], [0.3 + 0.2j, -0.4]]),
        T=np.array([[0.8 + 0.6j], [1.1 - 0.3j]]),
    )
    g = build_approx_graph(st, 0.1)
    print("--- complex T forces magnetic inner edges (d = 0.1)")
    for (j, k), a in sorted(g.a_inner.items()):
        if j < k:
            print(f"a[{j}-{k}] = {a:+.6f}   (and a[{k}-{j}] = {-a:+.6f})")
    print()
    print("serialized graph document:")
    print(dumps(g))


def singular_section():
    st = STForm(
        n=3,
        m=2,
        perm=(1, 2, 3),
        S=np.array([[0.0, -10.0], [-10.0, 0.0]]),
        T=np.array([[1.0], [1.0]]),
    )
    print("--- the pair argument 1 - 10 d cancels at d = 0.1")
    try:
        build_approx_graph(st, 0.1)
    except SingularDError as exc:
        print(f"SingularDError: {exc}")
    g = build_approx_graph(st, 0.09)
    print(f"at d = 0.09 the build succeeds: w_inner[(1, 2)] = {g.w_inner[(1, 2)]:.6g}")


def main():
    delta_prime_section()
    magnetic_section()
    singular_section()


if __name__ == "__main__":
    main()
