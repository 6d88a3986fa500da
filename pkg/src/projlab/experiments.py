"""Experiment runners binding the lab together, one per CLI subcommand.

Each runner consumes an ExperimentConfig and returns an ExperimentResult:
column names, data rows, and header/footer comment lines.  CSV emission and
figure rendering live elsewhere; runners stay pure and deterministic for a
fixed (config, seed).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import config as cf
from . import domain_map as dm
from . import galerkin as ga
from . import grid as gr
from . import lattice
from . import projections as pj
from . import resolvent as rv
from .errors import ConfigError, SplittingError

PI = math.pi


@dataclass
class ExperimentResult:
    name: str
    columns: list
    rows: list
    comments: list = field(default_factory=list)
    footers: list = field(default_factory=list)


def _result(name, cfg, columns, rows, footers=()):
    comments = [f"projlab v{__version__}", f"experiment = {name}"]
    comments.extend(cf.config_echo(cfg))
    return ExperimentResult(
        name=name, columns=columns, rows=rows, comments=comments, footers=list(footers)
    )


def write_csv(result: ExperimentResult, path):
    """Comment header (config echo), column row, data rows, footer comments."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in result.comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(result.columns) + "\n")
        for row in result.rows:
            fh.write(",".join("" if v is None else repr(v) for v in row) + "\n")
        for line in result.footers:
            fh.write(f"# {line}\n")


def run_census(cfg: cf.ExperimentConfig) -> ExperimentResult:
    """Splitting census of the square cutoffs F_N for N = 1..N_max."""
    rows = []
    for N in range(1, cfg.N_max + 1):
        F = lattice.cutoff_square(N)
        split_list = lattice.splits(F)
        gamma = lattice.bad_region(N)
        first = split_list[0][0] if split_list else None
        rows.append([N, len(F), len(split_list), len(gamma), first])
    return _result(
        "census",
        cfg,
        ["N", "card_F", "n_splits", "card_gamma", "first_split_lambda"],
        rows,
    )


def run_perturb_sweep(cfg: cf.ExperimentConfig) -> ExperimentResult:
    """Projection-difference reports along the family's deviation sweep."""
    F = cf.resolve_index_set(cfg)
    split_list = lattice.splits(F)
    if split_list:
        raise SplittingError(
            f"{F.label} splits {[s[0] for s in split_list]}; pick a non-splitting F"
        )
    grid = gr.make_grid(cfg.n_1d)
    rows = []
    for value in cf.sweep_values(cfg):
        pmap = cf.resolve_map(cfg, deviation=value)
        for p in cfg.p_list:
            report = pj.projection_diff_report(
                F,
                pmap,
                p,
                cfg.M,
                grid,
                restarts=cfg.restarts,
                iters=cfg.iters,
                seed=cfg.seed,
                sample_density=cfg.metrics_density,
            )
            rows.append(
                [
                    value,
                    report.map_label,
                    report.F_label,
                    report.p,
                    report.measured_diff_norm,
                    report.bound_value,
                    report.inf_det,
                    report.sup_one_minus_det,
                    report.kappa,
                    report.C_F_phi,
                ]
            )
    return _result(
        "perturb",
        cfg,
        [
            "sweep",
            "map_label",
            "F_label",
            "p",
            "measured",
            "bound",
            "inf_det",
            "sup_one_minus_det",
            "kappa",
            "C_F_phi",
        ],
        rows,
    )


def run_kato_check(cfg: cf.ExperimentConfig) -> ExperimentResult:
    """Contour-vs-direct projection errors for both operators, per node count."""
    F = cf.resolve_index_set(cfg)
    window = lattice.spectrum_window(F)  # raises SplittingError early
    positions = window.positions
    grid = gr.make_grid(cfg.n_1d)
    pmap = cf.resolve_map(cfg)
    pair = ga.assemble(pmap, cfg.M, grid)
    basis = ga.solve_eigen(pair, min(max(positions) + 4, cfg.M**2))

    direct_T = rv.unperturbed_projection_matrix(F, cfg.M)
    direct_phi = rv.direct_projection_matrix(positions, basis, pair)

    rows = []
    for nodes in cfg.nodes_list:
        contour = rv.build_contour(window, basis.eigenvalues, nodes=nodes)
        kato_T = rv.kato_projection(contour, M=cfg.M)
        kato_phi = rv.kato_projection(contour, pair=pair)
        err_T = float(np.linalg.norm(kato_T.matrix - direct_T))
        err_phi = float(np.linalg.norm(kato_phi.matrix - direct_phi))
        err_diff = float(
            np.linalg.norm(
                (kato_T.matrix - kato_phi.matrix) - (direct_T - direct_phi)
            )
        )
        rows.append([nodes, err_T, err_phi, err_diff])
    return _result(
        "kato", cfg, ["nodes", "err_T", "err_Tphi", "err_diff"], rows
    )


def _worst_case_mihlin(window, n_radial):
    """Max Mihlin estimate over real z spanning the window's valid pole range."""
    s_lo = math.sqrt(window.distinct_values_inside[-1])
    s_hi = math.sqrt(window.value_above)
    delta = (s_hi - s_lo) / 4.0
    r_lo, r_hi = s_lo + delta, s_hi - delta
    width = r_hi - r_lo
    best = (0.0, None)
    for center in np.linspace(r_lo + 0.1 * width, r_hi - 0.1 * width, 7):
        z = 1.0 / center**2
        symbol = rv.build_cutoff(z, window)
        estimate = rv.mihlin_constant(symbol, n_radial=n_radial)
        if estimate > best[0]:
            best = (estimate, z)
    return best


def run_multiplier_growth(cfg: cf.ExperimentConfig) -> ExperimentResult:
    """Mihlin-constant growth across ball-cutoff windows B_N, N in N_list.

    Ball cutoffs never split, so every N yields a valid window; the paper's
    first-N-eigenvalues indexing lands on zero gaps whenever position N ends
    inside a multiplicity cluster.
    """
    rows = []
    for N in cfg.N_list:
        window = lattice.spectrum_window(lattice.cutoff_ball(N))
        estimate, z = _worst_case_mihlin(window, cfg.sample_density)
        rows.append([N, z.real if z else None, 0.0, estimate, cfg.sample_density])
    logs = [(math.log(row[0]), math.log(row[3])) for row in rows if row[3] > 0]
    slope = float(
        np.polyfit([a for a, _ in logs], [b for _, b in logs], 1)[0]
    )
    return _result(
        "multiplier",
        cfg,
        ["N", "z_re", "z_im", "A_estimate", "sample_density"],
        rows,
        footers=[f"loglog_slope = {slope!r}"],
    )


def run_lebesgue_trend(cfg: cf.ExperimentConfig) -> ExperimentResult:
    """Lower bounds on the square/ball partial-sum norms over N and p."""
    M = max(cfg.N_list)
    n_1d = max(cfg.n_1d, 2 * M + 8)
    grid = gr.make_grid(n_1d)
    rows = []
    for N in cfg.N_list:
        square_op = pj.reference_projection_operator(lattice.cutoff_square(N), grid, M)
        ball_op = pj.reference_projection_operator(lattice.cutoff_ball(N), grid, M)
        for p in cfg.p_list:
            norm_square = gr.estimate_opnorm_p(
                square_op, p, grid, restarts=cfg.restarts, iters=cfg.iters, seed=cfg.seed
            )
            norm_ball = gr.estimate_opnorm_p(
                ball_op, p, grid, restarts=cfg.restarts, iters=cfg.iters, seed=cfg.seed
            )
            rows.append([N, p, norm_square, norm_ball])
    return _result(
        "lebesgue",
        cfg,
        ["N", "p", "norm_square_cutoff", "norm_ball_cutoff"],
        rows,
    )


def run_eigen_continuity(cfg: cf.ExperimentConfig) -> ExperimentResult:
    """Relative eigenvalue deviation against the map's W^{1,inf} distance."""
    if cfg.map_family != "bump":
        raise ConfigError("eigencont requires map.family = bump")
    k = cfg.k_eigen
    listing = lattice.enumerate_modes(max(cfg.M, 8))
    lam_exact = np.asarray([m.eigenvalue for m in listing[:k]], dtype=float)
    grid = gr.make_grid(cfg.n_1d)
    sweep = cfg.sweep if cfg.sweep else (0.08, 0.04, 0.02, 0.01)
    rows = []
    for eps in sweep:
        pmap = cf.resolve_map(cfg, deviation=eps)
        pair = ga.assemble(pmap, cfg.M, grid)
        basis = ga.solve_eigen(pair, k)
        max_rel_dev = float(np.abs(basis.eigenvalues / lam_exact - 1.0).max())
        if eps == 0.0:
            w1 = 0.0
            ratio = None
        else:
            metrics = dm.admissibility_metrics(pmap, cfg.metrics_density)
            w1 = metrics.w1inf_dist
            ratio = max_rel_dev / w1 if w1 > 0 else None
        rows.append([eps, w1, max_rel_dev, ratio])
    return _result(
        "eigencont", cfg, ["eps", "w1inf", "max_rel_dev", "ratio"], rows
    )


RUNNERS = {
    "census": run_census,
    "perturb": run_perturb_sweep,
    "kato": run_kato_check,
    "multiplier": run_multiplier_growth,
    "lebesgue": run_lebesgue_trend,
    "eigencont": run_eigen_continuity,
}
