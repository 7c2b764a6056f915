"""Mixed graded/uniform time meshes.

The mesh covers [0, T] with nu geometrically growing steps over the prefix
[0, n*h] followed by uniform steps of size h = T/N on [n*h, T].  The graded
steps are h_i = h1 * r^(i-1) with h1 fixed by the covering constraint

    h1 * (r^nu - 1) / (r - 1) = n * h.

The ratio is r = 2 when n = 1 and r = n/(n-1) otherwise; in the latter case
the last graded step slightly exceeds h, and nu is increased until
h_nu <= 1.1 * h.  nu = n = 1 degenerates to a purely uniform mesh, n = N to
a purely graded one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MixedMesh", "StepDescriptor", "build_mixed_mesh", "step_descriptor"]


@dataclass(frozen=True)
class MixedMesh:
    """Immutable mesh with nu graded steps glued to N - n uniform ones.

    ``times`` holds the nu + 1 + (N - n) node times, starting at 0 and
    ending at T, with the glue node at n*h.  ``nu`` is the effective count
    after the h_nu <= 1.1*h adjustment.
    """

    T: float
    N: int
    n: int
    nu: int
    r: float
    h: float
    h1: float
    times: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.nu + self.N - self.n

    @property
    def node_count(self) -> int:
        return self.times.size

    def graded_step_size(self, i: int) -> float:
        """Size of graded step i = 1..nu."""
        return self.h1 * self.r ** (i - 1)

    def echo(self) -> dict:
        """Parameter summary for run logs."""
        return {
            "T": self.T, "N": self.N, "n": self.n, "nu_effective": self.nu,
            "r": self.r, "h": self.h, "h1": self.h1, "node_count": self.node_count,
        }


@dataclass(frozen=True)
class StepDescriptor:
    kind: str            # "graded" or "uniform"
    local_index: int     # 1..nu for graded, n+1..N for uniform
    step_size: float
    left_time: float


def build_mixed_mesh(T: float, N: int, n: int, nu: int) -> MixedMesh:
    """Construct the mesh for the parameter tuple (T, N, n, nu).

    nu may come out larger than requested: for n > 1 it is incremented by 1
    until the last graded step satisfies h_nu <= 1.1*h (the smallest change
    honoring the constraint).  nu is never decreased.
    """
    if T <= 0:
        raise ValueError(f"final time must be positive, got T={T}")
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    if nu < 1:
        raise ValueError(f"need nu >= 1, got nu={nu}")

    h = T / N
    r = 2.0 if n == 1 else n / (n - 1.0)
    if n > 1:
        # h_nu = h / (1 - r^-nu) > h; bump nu until within the 10% allowance
        while h / (1.0 - r ** (-nu)) > 1.1 * h:
            nu += 1
    h1 = n * h * (r - 1.0) / (r ** nu - 1.0)

    times = np.empty(nu + 1 + (N - n))
    times[0] = 0.0
    acc = 0.0
    for i in range(1, nu + 1):
        acc += h1 * r ** (i - 1)
        times[i] = acc
    times[nu] = n * h  # snap the glue node, removing accumulation drift
    for j in range(n + 1, N + 1):
        times[nu + j - n] = j * h
    times[-1] = T

    if np.any(np.diff(times) <= 0):
        raise ValueError("mesh nodes are not strictly increasing; invalid parameters")
    return MixedMesh(T=T, N=N, n=n, nu=nu, r=r, h=h, h1=h1, times=times)


def step_descriptor(mesh: MixedMesh, global_index: int) -> StepDescriptor:
    """Describe step ``global_index`` (0-based): graded steps first, then uniform."""
    if not 0 <= global_index < mesh.n_steps:
        raise IndexError(f"step index {global_index} out of range [0, {mesh.n_steps})")
    if global_index < mesh.nu:
        i = global_index + 1
        return StepDescriptor(
            kind="graded",
            local_index=i,
            step_size=mesh.graded_step_size(i),
            left_time=float(mesh.times[global_index]),
        )
    j = mesh.n + (global_index - mesh.nu) + 1
    return StepDescriptor(
        kind="uniform",
        local_index=j,
        step_size=mesh.h,
        left_time=float(mesh.times[global_index]),
    )
