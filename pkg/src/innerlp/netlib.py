"""Bundled Netlib problems and their reference data.

``PUBLISHED_ITERATIONS`` lists the interior-point iteration counts reported for
AB-GMRES, CGNE, MRNE and the modified Cholesky baseline. ``OPTIMAL_OBJECTIVE`` holds the
published Netlib optimal values.
"""

from __future__ import annotations

from importlib import resources

from .mps import LpProblem, read_mps

__all__ = ["NETLIB_PROBLEMS", "PUBLISHED_SIZES", "PUBLISHED_ITERATIONS", "OPTIMAL_OBJECTIVE", "netlib_path", "load_netlib"]

NETLIB_PROBLEMS = ("afiro", "adlittle", "sc50a", "sc50b", "blend", "share2b", "scagr7")

# (m, n) after conversion to standard form
PUBLISHED_SIZES = {
    "afiro": (27, 51),
    "adlittle": (56, 138),
    "sc50a": (50, 78),
    "sc50b": (50, 78),
    "blend": (74, 114),
    "share2b": (96, 162),
    "scagr7": (129, 185),
}

PUBLISHED_ITERATIONS = {
    "afiro": {"abgmres": 8, "cgne": 8, "mrne": 8, "ldlt": 8},
    "adlittle": {"abgmres": 12, "cgne": 13, "mrne": 13, "ldlt": 12},
    "sc50a": {"abgmres": 10, "cgne": 10, "mrne": 6, "ldlt": 10},
    "sc50b": {"abgmres": 7, "cgne": 7, "mrne": 7, "ldlt": 7},
    "blend": {"abgmres": 12, "cgne": 14, "mrne": 13, "ldlt": 12},
    "share2b": {"abgmres": 12, "cgne": 14, "mrne": 16, "ldlt": 12},
    "scagr7": {"abgmres": 14, "cgne": 15, "mrne": 15, "ldlt": 14},
}

OPTIMAL_OBJECTIVE = {
    "afiro": -464.75314286,
    "adlittle": 225494.96316,
    "sc50a": -64.575077059,
    "sc50b": -70.0,
    "blend": -30.812149846,
    "share2b": -415.73224074,
    "scagr7": -2331389.8243,
}


def netlib_path(name):
    if name not in NETLIB_PROBLEMS:
        raise KeyError(f"no bundled Netlib problem {name!r}")
    return resources.files("innerlp").joinpath("data").joinpath("netlib").joinpath(f"{name}.mps")


def load_netlib(name) -> LpProblem:
    with resources.as_file(netlib_path(name)) as path:
        prob = read_mps(path)
    prob.name = name
    return prob
