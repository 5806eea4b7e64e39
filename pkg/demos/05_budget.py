"""Error budgets for the thin-manifold refinement, and the form bound.

When each graph edge is further fattened into a thin tube of radius eps and
the half-length is coupled to it as d = eps^alpha, two error sources
compete: the form-level defect grows as the potentials strengthen, while
the operator-level defect shrinks with d.  The exponent budget tracks both
as exact fractions; alpha = 1/14 balances them at a combined rate of
eps^(1/28).

The second half verifies the quadratic-form bound that underpins those
rates: on a concrete approximating graph, the sampled delta terms must be
controlled by eta times the kinetic energy plus a computable constant
times the norm.
"""

from fractions import Fraction

from qgraph import (
    CouplingKind,
    NamedCoupling,
    build_approx_graph,
    c_eta,
    exponent_budget,
    form_bound_inputs,
    named_to_st,
    optimal_alpha,
    verify_form_bound,
)


def budget_section():
    print("--- exponent budget over a range of alpha")
    print("   alpha |    form | operator | combined")
    for alpha in (Fraction(1, 30), Fraction(1, 20), Fraction(1, 14)):
        b = exponent_budget(alpha)
        print(f"{str(alpha):>8} | {str(b.form):>7} | {str(b.operator):>8} | {str(b.combined):>8}")
    best, combined = optimal_alpha()
    print(f"optimal alpha = {best}, combined exponent = {combined}")
    best29, combined29 = optimal_alpha(eq29_holds=True)
    print(f"with the improved resolvent estimate: alpha = {best29}, exponent = {combined29}")
    print()


def form_bound_section():
    st = named_to_st(NamedCoupling(kind=CouplingKind.DELTA_PRIME_S, n=3, beta=1.0))
    g = build_approx_graph(st, 0.1)
    inputs = form_bound_inputs(g, eta=1.0)
    print("--- form bound on the delta-prime-s approximant (d = 0.1)")
    print(f"strongest potential   max_w = {inputs.max_w:g}")
    print(f"worst edge weight     wbar  = {max(inputs.wbar.values()):g}")
    print(f"form-bound constant   C_eta = {c_eta(inputs):g}")
    report = verify_form_bound(g, eta=1.0, n_samples=200, rng=0)
    print(
        f"sampled check: {report.n_samples} random spline fields, "
        f"{len(report.violations)} violations -> ok = {report.ok}"
    )


def main():
    budget_section()
    form_bound_section()


if __name__ == "__main__":
    main()
