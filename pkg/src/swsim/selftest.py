"""Randomized self-checks of the core identities and the comparison lemma.

Shared between the test suite and the CLI selftest subcommands so that both
exercise exactly the same oracles. All generators take an explicit seeded
``numpy.random.Generator``; nothing here draws global randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import GronwallInstance, gronwall_check
from .graphs import (
    GraphFamily,
    WeightedGraph,
    centering_matrix,
    generalized_laplacian,
    laplacian,
    offdiag_norm,
)

__all__ = [
    "CheckLine",
    "random_graph",
    "random_family",
    "laplacian_identity_suite",
    "gronwall_forward_instance",
    "gronwall_constant_growth",
    "gronwall_suite",
]


@dataclass(frozen=True)
class CheckLine:
    """One printed line of a selftest: a named margin against its tolerance."""

    name: str
    ok: bool
    worst: float
    tol: float

    def render(self) -> str:
        status = "ok" if self.ok else "FAIL"
        return f"{self.name:<44s} {status}  worst={self.worst:+.3e}  tol={self.tol:.1e}"


def random_graph(rng: np.random.Generator, n: int, p_edge: float = 0.5) -> WeightedGraph:
    """Random symmetric weighted graph; may be disconnected or empty."""
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < p_edge:
                w[i, j] = w[j, i] = rng.uniform(0.1, 2.0)
    return WeightedGraph(w)


def random_family(rng: np.random.Generator, n: int, n_modes: int) -> GraphFamily:
    return GraphFamily({m + 1: random_graph(rng, n) for m in range(n_modes)})


def laplacian_identity_suite(rng: np.random.Generator, trials: int) -> list[CheckLine]:
    """Check the four Laplacian identities on random instances.

    1. The centering projector is a contraction (norm at most 1).
    2. Centering absorbs into Laplacian products on either side, and the
       projector is idempotent.
    3. The bilinear exchange identity u' L(g, v 1') = v' L(g, u 1').
    4. The generalized Laplacian norm bound
       |L(g, B)| <= sqrt(n) |L(g)| * offdiag_norm(B).
    """
    worst = {k: 0.0 for k in ("contraction", "absorption", "exchange", "norm_bound")}
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        g = random_graph(rng, n)
        lap = laplacian(g)
        c0 = centering_matrix(n)
        b = rng.uniform(-2.0, 2.0, (n, n))
        u = rng.normal(size=n)
        v = rng.normal(size=n)

        worst["contraction"] = max(
            worst["contraction"], float(np.linalg.norm(c0, 2)) - 1.0
        )

        gl = generalized_laplacian(g, b)
        scale = max(1.0, float(np.abs(lap).max()), float(np.abs(gl).max()))
        absorb = max(
            float(np.abs(c0 @ lap - lap).max()),
            float(np.abs(gl @ c0 - gl).max()),
            float(np.abs(c0 @ c0 - c0).max()),
        )
        worst["absorption"] = max(worst["absorption"], absorb / scale)

        lhs = u @ generalized_laplacian(g, np.outer(v, np.ones(n)))
        rhs = v @ generalized_laplacian(g, np.outer(u, np.ones(n)))
        vec_scale = max(1.0, float(np.abs(lhs).max()), float(np.abs(rhs).max()))
        worst["exchange"] = max(worst["exchange"], float(np.abs(lhs - rhs).max()) / vec_scale)

        bound = math.sqrt(n) * float(np.linalg.norm(lap, 2)) * offdiag_norm(b)
        excess = float(np.linalg.norm(gl, 2)) - bound
        worst["norm_bound"] = max(worst["norm_bound"], excess / max(1.0, bound))

    tol = 1e-12
    return [
        CheckLine("centering projector is a contraction", worst["contraction"] <= tol,
                  worst["contraction"], tol),
        CheckLine("centering absorbs into Laplacian products", worst["absorption"] <= tol,
                  worst["absorption"], tol),
        CheckLine("bilinear exchange identity", worst["exchange"] <= tol,
                  worst["exchange"], tol),
        CheckLine("generalized Laplacian norm bound", worst["norm_bound"] <= tol,
                  worst["norm_bound"], tol),
    ]


def gronwall_forward_instance(
    rng: np.random.Generator, fine: int = 4000, keep: int = 200
) -> GronwallInstance:
    """Instance generated by forward-integrating the comparison ODE.

    The dissipated density is chosen proportional to the tracked scalar
    (alpha2 = b2(t) * alpha1), which keeps alpha1 nonnegative while the
    equality version of the premise holds exactly. Integration runs on a
    fine RK4 grid; the instance keeps a subsampled grid but carries tail
    integrals accumulated at the fine resolution.
    """
    span = float(rng.uniform(2.0, 6.0))
    amp3 = float(rng.uniform(0.05, 0.6))
    base3 = float(rng.uniform(0.0, 0.3))
    w3 = float(rng.uniform(0.5, 3.0))
    ph3 = float(rng.uniform(0.0, 2.0 * math.pi))
    amp2 = float(rng.uniform(0.1, 1.5))
    base2 = float(rng.uniform(0.0, 0.5))
    w2 = float(rng.uniform(0.5, 3.0))
    ph2 = float(rng.uniform(0.0, 2.0 * math.pi))

    def alpha3_of(t):
        return amp3 * np.sin(w3 * t + ph3) ** 2 + base3

    def decay_of(t):
        return amp2 * np.cos(w2 * t + ph2) ** 2 + base2

    t = np.linspace(0.0, span, fine + 1)
    h = span / fine
    a1 = np.empty(fine + 1)
    a1[0] = float(rng.uniform(0.0, 2.0))

    def ode(tt, x):
        return -decay_of(tt) * x + alpha3_of(tt) * (1.0 + x)

    for k in range(fine):
        tk = t[k]
        x = a1[k]
        k1 = ode(tk, x)
        k2 = ode(tk + 0.5 * h, x + 0.5 * h * k1)
        k3 = ode(tk + 0.5 * h, x + 0.5 * h * k2)
        k4 = ode(tk + h, x + h * k3)
        a1[k + 1] = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    a3 = alpha3_of(t)
    a2 = decay_of(t) * a1
    seg2 = 0.5 * h * (a2[1:] + a2[:-1])
    seg3 = 0.5 * h * (a3[1:] + a3[:-1])
    tail2 = np.zeros(fine + 1)
    tail3 = np.zeros(fine + 1)
    tail2[:-1] = np.cumsum(seg2[::-1])[::-1]
    tail3[:-1] = np.cumsum(seg3[::-1])[::-1]

    idx = np.unique(np.linspace(0, fine, keep + 1).astype(int))
    return GronwallInstance(
        times=t[idx],
        alpha1=np.maximum(a1[idx], 0.0),
        alpha2=a2[idx],
        alpha3=a3[idx],
        alpha2_tail=tail2[idx],
        alpha3_tail=tail3[idx],
    )


def gronwall_constant_growth(
    lam: float, a10: float, span: float, m: int = 200
) -> tuple[GronwallInstance, np.ndarray]:
    """Closed-form instance with constant perturbation and no dissipation.

    With alpha2 = 0 and alpha3 = lam the state bound holds with equality:
    alpha1(t) = (1 + alpha1(0)) exp(lam t) - 1. Returns the instance and the
    closed-form samples for equality assertions.
    """
    t = np.linspace(0.0, span, m + 1)
    a1 = (1.0 + a10) * np.exp(lam * t) - 1.0
    inst = GronwallInstance(
        times=t,
        alpha1=a1,
        alpha2=np.zeros_like(t),
        alpha3=np.full_like(t, lam),
        alpha2_tail=np.zeros_like(t),
        alpha3_tail=lam * (span - t),
    )
    return inst, a1


def gronwall_suite(rng: np.random.Generator, trials: int) -> list[CheckLine]:
    """Comparison-lemma checks: random forward instances plus the equality case."""
    worst_state = math.inf
    worst_energy = math.inf
    for _ in range(trials):
        verdict = gronwall_check(gronwall_forward_instance(rng))
        worst_state = min(worst_state, verdict.state_margin)
        worst_energy = min(worst_energy, verdict.energy_margin)

    lam = float(rng.uniform(0.2, 1.0))
    a10 = float(rng.uniform(0.0, 2.0))
    inst, closed = gronwall_constant_growth(lam, a10, span=3.0)
    verdict = gronwall_check(inst)
    fwd = inst.alpha3_tail[0] - inst.alpha3_tail
    eq_err = float(np.abs(np.exp(fwd) * (1.0 + closed[0]) - 1.0 - closed).max())

    tol = 1e-8
    return [
        CheckLine(f"state bound on {trials} forward instances", worst_state >= -tol,
                  worst_state, tol),
        CheckLine(f"energy bound on {trials} forward instances", worst_energy >= -tol,
                  worst_energy, tol),
        CheckLine("constant-growth case meets the bound exactly",
                  verdict.state_bound_ok and eq_err <= tol, eq_err, tol),
    ]
