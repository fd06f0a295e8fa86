"""Built-in problems and problem lookup by id."""

from __future__ import annotations

import numpy as np

from .errors import ProblemSpecError
from .model import AffineQuadratic, Problem, Terminal, load_lq_file

_OSC_A = np.array([[0.0, 1.0], [-1.0, 0.0]])
_OSC_B = np.array([[0.0], [1.0]])


def ex1_data() -> AffineQuadratic:
    """Harmonic oscillator x1' = x2, x2' = -x1 + u, tracking (2, 7) with u near 0."""
    return AffineQuadratic(A=_OSC_A, B=_OSC_B, Q=np.eye(2), U=np.eye(1), xd=[2.0, 7.0], ud=[0.0])


def ex2_data() -> AffineQuadratic:
    """Oscillator with the explosive term: x2' = 1 - x1 + x2**3 + u."""
    return AffineQuadratic(
        A=_OSC_A,
        B=_OSC_B,
        c=[0.0, 1.0],
        Q=np.eye(2),
        U=np.eye(1),
        xd=[0.5, 0.5],
        ud=[1.0],
        mono_out=[1],
        mono_coef=[1.0],
        mono_pow=[[0, 3]],
    )


def ex1(terminal: Terminal | None = None) -> Problem:
    terminal = terminal or Terminal("fixed-initial-free-final", x0=[0.0, 0.0])
    return ex1_data().to_problem(terminal, name="ex1")


def ex2(terminal: Terminal | None = None) -> Problem:
    terminal = terminal or Terminal("fixed-both", x0=[1.0, 1.0], x1=[3.0, 0.0])
    return ex2_data().to_problem(terminal, name="ex2")


REGISTRY = {
    "ex1": ex1,
    "ex2": ex2,
    "ex1-periodic": lambda: ex1(Terminal("periodic")).with_terminal(Terminal("periodic"), "ex1-periodic"),
    "ex2-periodic": lambda: ex2(Terminal("periodic")).with_terminal(Terminal("periodic"), "ex2-periodic"),
}


def get_problem(ident: str) -> Problem:
    """Resolve ``ex1``, ``ex2``, ``ex1-periodic``, ``ex2-periodic``,
    ``lq:<file>`` or a bare path to an LQ JSON file."""
    if ident in REGISTRY:
        return REGISTRY[ident]()
    if ident.startswith("lq:"):
        return load_lq_file(ident[3:])
    if ident.endswith(".json"):
        return load_lq_file(ident)
    raise ProblemSpecError(f"unknown problem id {ident!r}", known=sorted(REGISTRY))
