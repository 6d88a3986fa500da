"""Figure rendering for experiment results, one PNG per CSV.

Plots are a reading aid; the CSV stays the contract.  Everything renders
off-screen (Agg) so the CLI works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "lines.markersize": 4.5,
}


def _column(result, name):
    idx = result.columns.index(name)
    return [row[idx] for row in result.rows]


def _numeric(values):
    return np.asarray([np.nan if v is None else float(v) for v in values])


def _plot_census(result, ax):
    N = _numeric(_column(result, "N"))
    ax.step(N, _numeric(_column(result, "n_splits")), where="mid", label="split count")
    ax.step(
        N, _numeric(_column(result, "card_gamma")), where="mid", label="|bad region|"
    )
    ax.set_xlabel("N (square cutoff)")
    ax.set_ylabel("count")
    ax.legend()
    ax.set_title("Eigenvalue splitting of the square cutoffs")


def _plot_perturb(result, ax):
    sweep = _numeric(_column(result, "sweep"))
    measured = _numeric(_column(result, "measured"))
    bound = _numeric(_column(result, "bound"))
    p_vals = _numeric(_column(result, "p"))
    for p in sorted(set(p_vals)):
        sel = p_vals == p
        order = np.argsort(sweep[sel])
        ax.loglog(sweep[sel][order], measured[sel][order], "o-", label=f"measured, p={p:g}")
        ax.loglog(
            sweep[sel][order], bound[sel][order], "s--", alpha=0.6, label=f"bound, p={p:g}"
        )
    ax.set_xlabel("deviation parameter")
    ax.set_ylabel("operator norm")
    ax.legend()
    ax.set_title("Projection difference under perturbation")


def _plot_kato(result, ax):
    nodes = _numeric(_column(result, "nodes"))
    for name in ("err_T", "err_Tphi", "err_diff"):
        ax.semilogy(nodes, np.maximum(_numeric(_column(result, name)), 1e-18), "o-", label=name)
    ax.set_xlabel("contour nodes per circle")
    ax.set_ylabel("Frobenius error")
    ax.legend()
    ax.set_title("Contour projection vs direct spectral projection")


def _plot_multiplier(result, ax):
    N = _numeric(_column(result, "N"))
    A = _numeric(_column(result, "A_estimate"))
    ax.loglog(N, A, "o-")
    slope = None
    for line in result.footers:
        if line.startswith("loglog_slope"):
            slope = float(line.split("=", 1)[1])
    if slope is not None:
        ax.set_title(f"Multiplier constant growth (fitted slope {slope:.2f})")
    else:
        ax.set_title("Multiplier constant growth")
    ax.set_xlabel("ball cutoff radius N")
    ax.set_ylabel("A estimate")


def _plot_lebesgue(result, ax):
    N = _numeric(_column(result, "N"))
    p_vals = _numeric(_column(result, "p"))
    for p in sorted(set(p_vals)):
        sel = p_vals == p
        ax.plot(N[sel], _numeric(_column(result, "norm_square_cutoff"))[sel], "o-",
                label=f"square, p={p:g}")
        ax.plot(N[sel], _numeric(_column(result, "norm_ball_cutoff"))[sel], "s--",
                label=f"ball, p={p:g}")
    ax.set_xlabel("cutoff size N")
    ax.set_ylabel("norm lower bound")
    ax.legend()
    ax.set_title("Partial-sum operator norms: square vs ball cutoffs")


def _plot_eigencont(result, ax):
    eps = _numeric(_column(result, "eps"))
    dev = _numeric(_column(result, "max_rel_dev"))
    sel = eps > 0
    ax.loglog(eps[sel], dev[sel], "o-", label="max relative deviation")
    ax.loglog(eps[sel], _numeric(_column(result, "w1inf"))[sel], "s--",
              label="W^{1,inf} distance")
    ax.set_xlabel("bump amplitude")
    ax.legend()
    ax.set_title("Eigenvalue continuity under the bump family")


_PLOTTERS = {
    "census": _plot_census,
    "perturb": _plot_perturb,
    "kato": _plot_kato,
    "multiplier": _plot_multiplier,
    "lebesgue": _plot_lebesgue,
    "eigencont": _plot_eigencont,
}


def render_figure(result, out_png):
    """Render the experiment's companion figure next to its CSV."""
    plotter = _PLOTTERS[result.name]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        plotter(result, ax)
        fig.tight_layout()
        fig.savefig(out_png)
        plt.close(fig)
    return out_png
