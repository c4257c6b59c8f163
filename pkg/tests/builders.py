"""Random metric files shared by the test modules."""

from __future__ import annotations

import numpy as np

from kkweyl.dsl import parse_metric_file
from kkweyl.kaluza_klein import KKData

COORDS = {2: ("t", "x"), 3: ("t", "x", "z"), 4: ("t", "x", "y", "z")}


def _signature(dim: int) -> str:
    return " ".join(["+"] + ["-"] * (dim - 1))


def _poly(rng, coords, scale: float, degree: int = 2) -> str:
    """Random polynomial of the given degree in ``coords`` (no constant term)."""
    terms = []
    for i, a in enumerate(coords):
        terms.append(f"{scale * rng.uniform(-1, 1):.6f}*{a}")
        if degree >= 2:
            for b in coords[i:]:
                terms.append(f"{0.5 * scale * rng.uniform(-1, 1):.6f}*{a}*{b}")
    return " + ".join(terms)


def conformally_flat_text(dim: int, rng) -> str:
    """``exp(2 s) A^T eta A`` with a random linear mix ``A`` and a random ``s``."""
    coords = COORDS[dim]
    eta = np.diag([1.0] + [-1.0] * (dim - 1))
    a = np.eye(dim) + 0.25 * rng.uniform(-1, 1, (dim, dim))
    g = a.T @ eta @ a
    k = rng.uniform(-1, 1, dim)
    wave = " + ".join(f"{x:.6f}*{c}" for x, c in zip(k, coords))
    lines = [f"dim {dim}", f"signature {_signature(dim)}", "coords " + " ".join(coords),
             f"define s = {_poly(rng, coords, 0.3)} + 0.1*sin({wave})"]
    for i in range(dim):
        for j in range(i, dim):
            lines.append(f"g[{i}][{j}] = exp(2*s)*({g[i, j]:.12f})")
    lines += [f"domain {c} = [-0.5, 0.5]" for c in coords]
    return "\n".join(lines) + "\n"


def generic_text(dim: int, rng, amplitude: float = 0.1) -> str:
    """Minkowski plus random quadratic perturbations (not conformally flat)."""
    coords = COORDS[dim]
    lines = [f"dim {dim}", f"signature {_signature(dim)}", "coords " + " ".join(coords)]
    for i in range(dim):
        for j in range(i, dim):
            base = (1.0 if i == 0 else -1.0) if i == j else 0.0
            lines.append(f"g[{i}][{j}] = {base} + {_poly(rng, coords, amplitude)}")
    lines += [f"domain {c} = [-0.4, 0.4]" for c in coords]
    return "\n".join(lines) + "\n"


def kk_text(base_dim: int, rng, sigma: bool = True) -> str:
    """Generic base, potential and conformal factor for a reduction."""
    coords = COORDS[base_dim]
    lines = generic_text(base_dim, rng).splitlines()
    lines = [ln for ln in lines if not ln.startswith("domain")]
    for i in range(base_dim):
        lines.append(f"potential[{i}] = {_poly(rng, coords, 0.4)}")
    if sigma:
        lines.append(f"conformal = {_poly(rng, coords, 0.2)}")
    lines += [f"domain {c} = [-0.3, 0.3]" for c in coords]
    return "\n".join(lines) + "\n"


def random_kk(base_dim: int, seed: int, sigma: bool = True) -> KKData:
    return KKData.from_file(parse_metric_file(kk_text(base_dim, np.random.default_rng(seed), sigma)))


def sample(rng, dim: int, count: int, half: float = 0.3) -> list[tuple]:
    return [tuple(rng.uniform(-half, half, dim)) for _ in range(count)]
