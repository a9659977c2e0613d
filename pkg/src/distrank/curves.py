"""Tabulated loss and gradient curves of the distributional loss.

Each table is ``(name, grid_note, columns, rows)``. When one of sigma_f and
sigma_c is not pinned, the pair variance is split evenly:
sigma_f = sigma_c = sigma_z / sqrt(2).
"""

from __future__ import annotations

import numpy as np

from distrank.core import pair_loss_terms

# exact binary grids, so mu_z = 0 and sigma = 1 are hit exactly
MU_GRID = np.arange(-200, 201) / 40.0  # [-5, 5], step 0.025
SIGMA_GRID = np.arange(4, 401) / 40.0  # [0.1, 10], step 0.025


def _even(sigma_z):
    s = np.asarray(sigma_z) / np.sqrt(2.0)
    return s, s


def loss_vs_mu_z():
    sf, sc = _even(1.0)
    loss = pair_loss_terms(MU_GRID, 0.0, sf, sc)[0]
    return "loss_vs_mu_z", "sigma_z=1; mu_z=-5..5 step 0.025", ("mu_z", "loss"), zip(MU_GRID, loss)


def loss_vs_sigma_z():
    sf, sc = _even(SIGMA_GRID)
    pos = pair_loss_terms(1.0, 0.0, sf, sc)[0]
    neg = pair_loss_terms(-1.0, 0.0, sf, sc)[0]
    return (
        "loss_vs_sigma_z",
        "mu_z=+1 and mu_z=-1; sigma_z=0.1..10 step 0.025; sigma_f=sigma_c",
        ("sigma_z", "loss_mu_z_pos1", "loss_mu_z_neg1"),
        zip(SIGMA_GRID, pos, neg),
    )


def grad_mu_f_vs_mu_z():
    sf, sc = _even(1.0)
    g = pair_loss_terms(MU_GRID, 0.0, sf, sc)[1]
    return "grad_mu_f_vs_mu_z", "sigma_z=1; mu_z=-5..5 step 0.025", ("mu_z", "grad_mu_f"), zip(MU_GRID, g)


def grad_mu_f_vs_sigma_z():
    sf, sc = _even(SIGMA_GRID)
    pos = pair_loss_terms(1.0, 0.0, sf, sc)[1]
    neg = pair_loss_terms(-1.0, 0.0, sf, sc)[1]
    return (
        "grad_mu_f_vs_sigma_z",
        "mu_z=+1 and mu_z=-1; sigma_z=0.1..10 step 0.025; sigma_f=sigma_c",
        ("sigma_z", "grad_mu_f_mu_z_pos1", "grad_mu_f_mu_z_neg1"),
        zip(SIGMA_GRID, pos, neg),
    )


def grad_sigma_f_vs_mu_z():
    g = pair_loss_terms(MU_GRID, 0.0, 1.0, 1.0)[3]
    return (
        "grad_sigma_f_vs_mu_z",
        "sigma_f=sigma_c=1; mu_z=-5..5 step 0.025",
        ("mu_z", "grad_sigma_f"),
        zip(MU_GRID, g),
    )


def grad_sigma_f_vs_sigma_c():
    pos = pair_loss_terms(1.0, 0.0, 1.0, SIGMA_GRID)[3]
    neg = pair_loss_terms(-1.0, 0.0, 1.0, SIGMA_GRID)[3]
    return (
        "grad_sigma_f_vs_sigma_c",
        "sigma_f=1; mu_z=+1 and mu_z=-1; sigma_c=0.1..10 step 0.025",
        ("sigma_c", "grad_sigma_f_mu_z_pos1", "grad_sigma_f_mu_z_neg1"),
        zip(SIGMA_GRID, pos, neg),
    )


ALL_CURVES = (
    loss_vs_mu_z,
    loss_vs_sigma_z,
    grad_mu_f_vs_mu_z,
    grad_mu_f_vs_sigma_z,
    grad_sigma_f_vs_mu_z,
    grad_sigma_f_vs_sigma_c,
)


def curve_csv(table) -> tuple[str, str]:
    """Render one table as ``(filename, text)``; the first line is a ``#`` grid comment."""
    name, note, cols, rows = table
    lines = [f"# {note}", ",".join(cols)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    return f"{name}.csv", "\n".join(lines) + "\n"


def read_curve_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    return cols, np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
