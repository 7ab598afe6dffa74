"""Dataset generation and the verification suites behind ``cmnls verify``.

Each suite returns a list of :class:`Metric` records ``{suite, metric, value,
tolerance, comparison, pass}``.  Informational metrics carry
``comparison = 'info'`` and always pass.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import direct_scattering as ds
from . import pde_reference as pde
from . import residues_global as rg
from . import rh_assembly as rh
from .config import as_complex, initial_profile, model_params, quad_options
from .errors import InteriorMissingError, ValidityDomainError
from .fields import FieldData, plane_wave_solution
from .lax_core import ModelParams, det3, k_of

SUITES = ("pde", "eigen", "symmetry", "regions", "spectral", "asymptotics", "global", "residues",
          "reconstruction")

# one planted zero per region for the manufactured residue checks
PLANTED_ZEROS = {"D1": 1.5 + 0.3j, "D2": 0.3 + 1.5j, "D3": -0.3 + 1.5j, "D4": -1.5 + 0.3j}


@dataclass
class Metric:
    suite: str
    metric: str
    value: float
    tolerance: Optional[float]
    comparison: str = "<="
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.comparison == "info":
            return True
        if self.comparison == "<=":
            return bool(self.value <= self.tolerance)
        return bool(self.value >= self.tolerance)

    def to_dict(self) -> dict:
        v = self.value
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        d = {"suite": self.suite, "metric": self.metric, "value": v, "tolerance": self.tolerance,
             "comparison": self.comparison, "pass": self.passed}
        if self.note:
            d["note"] = self.note
        return d


def _pmap(fn: Callable, items, threads: int):
    items = list(items)
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# dataset generation

def line_grid(L: float, dx: float) -> np.ndarray:
    n = int(round(2 * L / dx))
    return np.linspace(-L, L, n + 1)


def generate_dataset(cfg: dict) -> FieldData:
    """Solve the line problem of ``cfg`` and restrict it to the half-line.

    With ``model.epsilon = 'calibrate'`` the symmetry sign is chosen from the
    data and recorded in the metadata.
    """
    g = cfg["grid"]
    params = model_params(cfg)
    x = line_grid(g["L"], g["dx"])
    u0, v0 = initial_profile(cfg, x)
    dt = g["dt"] or g["c_stab"] * g["dx"] ** 2
    ls = pde.solve_line_ivp(x, u0, v0, g["T"], dt, params, store_dt=g["store_dt"],
                            store_x_every=int(g["store_x_every"]), c_stab=g["c_stab"])
    meta = {"name": cfg["name"], "initial": dict(cfg["initial"]), "grid": dict(g)}
    fd = pde.extract_halfline_data(ls, metadata=meta)
    if cfg["model"]["epsilon"] == "calibrate":
        lams = [as_complex(z) for z in cfg["sampling"]["symmetry_lambdas"]]
        cal = ds.calibrate_epsilon(fd, lams, opts=quad_options(cfg))
        fd = fd.replace(params=ModelParams(params.delta, params.gamma, cal["epsilon"]),
                        metadata={**fd.metadata, "epsilon_calibration": cal})
    return fd


# --------------------------------------------------------------------------
# 1. PDE reference

def _order(errs) -> float:
    """Two-level observed order ``log2(e_coarse / e_fine)``."""
    if errs[-1] == 0 or errs[-2] == 0:
        return math.inf
    return math.log2(errs[-2] / errs[-1])


def _order_metric(name, order, design, errs, label):
    # observed orders carry an O(h^2) bias; they are compared at one decimal
    note = f"raw {order:.4f}; {label} " + ", ".join(f"{e:.3e}" for e in errs)
    return Metric("pde", name, round(order, 1) if math.isfinite(order) else order, design, ">=", note=note)


def suite_pde(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "pde"
    tol = cfg["tolerances"]
    sm = cfg["sampling"]
    params = fd.params
    out = [Metric(S, "mass_drift", float(fd.metadata.get("mass_drift", math.nan)), tol["mass_drift"])]
    # residual convergence on the configured initial profile
    res = []
    for dx in sm["pde_dx_levels"]:
        x = line_grid(cfg["grid"]["L"], dx)
        u0, v0 = initial_profile(cfg, x)
        dt = cfg["grid"]["c_stab"] * dx * dx
        ls = pde.solve_line_ivp(x, u0, v0, sm["pde_T"], dt, params, store_dt=0.05 * dx)
        res.append(pde.pde_residual(ls))
    orders = [_order(res[i:i + 2]) for i in range(len(res) - 1)]
    out.append(_order_metric("residual_order", float(min(orders)), tol["pde_order"], res, "residuals"))
    # plane wave on a periodic grid
    a, kappa = sm["plane_wave"]
    pw = plane_wave_solution(a, kappa, params)
    errs = []
    for nx in sm["plane_wave_nx"]:
        xx = np.arange(nx) * 2 * np.pi / (kappa * nx)
        h = xx[1] - xx[0]
        u0, v0 = pw.fields(xx, 0.0)
        ls = pde.solve_line_ivp(xx, u0, v0, sm["plane_wave_T"], 0.2 * h * h, params, periodic=True,
                                store_dt=sm["plane_wave_T"])
        ue, ve = pw.fields(xx, ls.t_grid[-1])
        errs.append(float(max(np.abs(ls.u[-1] - ue).max(), np.abs(ls.v[-1] - ve).max())))
    out.append(_order_metric("plane_wave_order", _order(errs), tol["plane_wave_order"], errs, "errors"))
    return out


# --------------------------------------------------------------------------
# 2. eigenfunction structure

def validity_sample(fd: FieldData, n: int, seed: int, re_max: float, opts: ds.QuadOptions,
                    probe=(5.0, 0.5)) -> list:
    """``n`` random ``lam`` where every column of every eigenfunction stays within the growth bound."""
    rng = np.random.default_rng(seed)
    x, t = probe
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 50 * n:
            raise RuntimeError("could not assemble the validity sample")
        lam = complex(rng.uniform(-re_max, re_max), rng.uniform(-re_max, re_max) * rng.choice([1e-3, 1e-2, 1e-1]))
        try:
            vals = [ds.compute_s(fd, lam, opts=opts).mu, ds.compute_S(fd, lam, opts=opts).mu]
            vals += [ds.integrate_eigenfunction(fd, j, x, t, lam, opts=opts).mu for j in (1, 2, 3)]
        except ValidityDomainError:
            continue
        out.append((lam, vals))
    return out


def suite_eigen(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "eigen"
    tol = cfg["tolerances"]
    sm = cfg["sampling"]
    fine = quad_options(cfg, fine=True)
    sample = validity_sample(fd, int(sm["det_samples"]), int(sm["seed"]), float(sm["det_re_max"]), fine,
                             tuple(sm["det_probe"]))
    det_err = max(abs(det3(m) - 1) for _, vals in sample for m in vals)
    out = [Metric(S, "det_minus_1", float(det_err), tol["det"], note=f"{len(sample)} lambda x 5 eigenfunctions")]
    est = ds.QuadOptions(**{**quad_options(cfg).__dict__, "estimate_error": True})

    def ratio(item):
        lam, (x, t) = item
        a = ds.integrate_eigenfunction(fd, 2, x, t, lam, opts=est)
        b = ds.integrate_eigenfunction(fd, 2, x, t, lam, opts=est, path="alternate")
        diff = float(np.max(np.abs(a.mu - b.mu)))
        denom = a.error + b.error
        return diff / denom if denom > 0 else (0.0 if diff == 0 else math.inf)

    items = [(as_complex(z), tuple(p)) for z in sm["path_lambdas"] for p in sm["path_probes"]]
    ratios = _pmap(ratio, items, threads)
    out.append(Metric(S, "path_discrepancy_over_estimate", float(max(ratios)), tol["path_ratio"]))
    return out


# --------------------------------------------------------------------------
# 3. symmetry

def suite_symmetry(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "symmetry"
    tol = cfg["tolerances"]
    lams = [as_complex(z) for z in cfg["sampling"]["symmetry_lambdas"]]
    which = ("s", "S", "mu2") if fd.has_interior else ("s", "S")
    cal = ds.calibrate_epsilon(fd, lams, which=which, opts=quad_options(cfg))
    out = [Metric(S, "epsilon", float(cal["epsilon"]), None, "info"),
           Metric(S, "residual_best_sign", cal["residual"], tol["symmetry"])]
    if cal["other_residual"] == 0 and cal["residual"] == 0:
        out.append(Metric(S, "other_sign_ratio", 0.0, None, "info",
                          note="data symmetric under both signs (zero data)"))
    else:
        out.append(Metric(S, "other_sign_ratio", float(cal["ratio"]), tol["symmetry_ratio"], ">="))
    return out


# --------------------------------------------------------------------------
# 4. regions

def brute_region_codes(lams: np.ndarray, params: ModelParams) -> np.ndarray:
    """Independent oracle: real arithmetic on ``lam = a + ib``."""
    a, b = np.real(lams), np.imag(lams)
    re_k = (a * a - b * b + params.delta / 2) / params.gamma
    im_k = 2 * a * b / params.gamma
    im_k2 = 2 * re_k * im_k
    code = np.zeros(a.shape, dtype=np.int8)
    code[(im_k > 0) & (im_k2 > 0)] = 1
    code[(im_k > 0) & (im_k2 < 0)] = 2
    code[(im_k < 0) & (im_k2 > 0)] = 3
    code[(im_k < 0) & (im_k2 < 0)] = 4
    return code, np.minimum(np.abs(im_k), np.abs(im_k2))


def suite_regions(fd: Optional[FieldData], cfg: dict, threads: int = 1) -> list:
    S = "regions"
    sm = cfg["sampling"]
    params = fd.params if fd is not None else model_params(cfg)
    rmap = rh.region_map_grid(tuple(sm["region_box"]), int(sm["region_resolution"]), params)
    counts = rmap.counts()
    present = sum(1 for t in rh.REGIONS if counts[t] > 0)
    out = [Metric(S, "regions_present", float(present), 4.0, ">=", note=str(counts))]
    rng = np.random.default_rng(int(sm["seed"]) + 1)
    x0, x1, y0, y1 = sm["region_box"]
    lams = rng.uniform(x0, x1, int(sm["oracle_points"])) + 1j * rng.uniform(y0, y1, int(sm["oracle_points"]))
    want, margin = brute_region_codes(lams, params)
    got = rh.classify_array(lams, params)
    off = margin > 1e-6
    out.append(Metric(S, "oracle_disagreements", float(np.count_nonzero(got[off] != want[off])), 0.0,
                      note=f"{int(off.sum())} points off the boundary band"))
    # conjugation flips Im k: D1 <-> D4, D2 <-> D3
    flip = np.array([0, 4, 3, 2, 1], dtype=np.int8)
    conj = rh.classify_array(np.conj(lams), params)
    out.append(Metric(S, "conjugation_antisymmetry_violations", float(np.count_nonzero(conj[off] != flip[got[off]])),
                      0.0))
    return out


# --------------------------------------------------------------------------
# 5. spectral algebra

def boundary_points(params: ModelParams, n: int, radius: float) -> list:
    """``(lam, m, n)`` samples on the arcs separating the regions (upper half plane, ``gamma > 0``)."""
    c = params.delta / 2
    pts = []
    r = np.linspace(0, radius, n + 2)[1:-1]
    pts += [(complex(a), "D1", "D4") for a in r]                       # real axis
    if c > 0:
        b_lo = np.linspace(0, math.sqrt(c), n + 2)[1:-1]
        b_hi = np.linspace(math.sqrt(c), max(radius, 2 * math.sqrt(c)), n + 2)[1:-1]
        pts += [(1j * b, "D1", "D4") for b in b_lo]                     # imaginary axis below the triple point
        pts += [(1j * b, "D2", "D3") for b in b_hi]                     # and above it
        a = np.linspace(0, radius, n + 2)[1:-1]
        hyp = np.sqrt(a * a + c)                                        # Re k = 0
        pts += [(complex(x, y), "D1", "D2") for x, y in zip(a, hyp)]
        pts += [(complex(-x, y), "D3", "D4") for x, y in zip(a, hyp)]
    return pts


def _random_unimodular(rng) -> np.ndarray:
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    return A / np.linalg.det(A) ** (1 / 3)


def suite_spectral(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "spectral"
    tol = cfg["tolerances"]
    sm = cfg["sampling"]
    params = fd.params
    fine = quad_options(cfg, fine=True)
    over = ds.QuadOptions(**{**fine.__dict__, "override_guard": True})
    out = []
    # algebra on exact unimodular inputs
    rng = np.random.default_rng(int(sm["seed"]) + 2)
    worst_sn = worst_j = 0.0
    for _ in range(50):
        s, Sm = _random_unimodular(rng), _random_unimodular(rng)
        for tag in rh.REGIONS:
            worst_sn = max(worst_sn, abs(det3(rh.assemble_Sn(s, Sm, tag)) - 1))
        J = rh.jump_matrix("D1", "D2", s, Sm, 0.3, 0.2, 1j * math.sqrt(params.delta / 2) + 0.0, params)
        worst_j = max(worst_j, abs(det3(J.J) - 1))
    out.append(Metric(S, "det_Sn_minus_1_unimodular", float(worst_sn), tol["det_algebraic"]))
    out.append(Metric(S, "det_J_minus_1_unimodular", float(worst_j), tol["det_algebraic"]))
    gamma_ok = all(rh.GAMMA_TABLE[t] == expected for t, expected in _GAMMA_EXPECTED.items())
    rule_ok = all(rh.gamma_table_from_rule(t, params) == rh.GAMMA_TABLE[t] for t in rh.REGIONS)
    out.append(Metric(S, "gamma_table_mismatches", float((not gamma_ok) + (not rule_ok)), 0.0))

    # data: determinants, jump identity, cocycle
    x, t = sm["jump_probe"]
    pts = boundary_points(params, int(sm["boundary_points"]), float(sm["boundary_radius"]))

    def check(item):
        lam, m, n = item
        sp = ds.spectral_sample(fd, lam, with_adjugates=True, opts=over)
        # S is bounded on every arc (Im k^2 = 0); s only where Im k = 0 as well
        d_s = abs(det3(sp.S) - 1)
        if abs(k_of(lam, params).imag) <= 1e-12:
            d_s = max(d_s, abs(det3(sp.s) - 1))
        Mm = rh.assemble_M(fd, x, t, lam, region=m, opts=fine, method="direct")
        Mn = rh.assemble_M(fd, x, t, lam, region=n, opts=fine, method="direct")
        J = rh.jump_matrix(m, n, sp.s, sp.S, x, t, lam, params, sA=sp.sA, SA=sp.SA)
        ident = float(np.linalg.norm(Mn - Mm @ J.J) / max(1.0, np.linalg.norm(Mn)))
        return d_s, abs(det3(J.J) - 1), ident

    res = _pmap(check, pts, threads)
    out.append(Metric(S, "det_s_S_minus_1", float(max(r[0] for r in res)), tol["det"],
                      note=f"{len(pts)} boundary points"))
    out.append(Metric(S, "det_J_minus_1_data", float(max(r[1] for r in res)), tol["det"]))
    out.append(Metric(S, "jump_identity", float(max(r[2] for r in res)), tol["jump"]))
    # cocycle at the triple points k = 0
    worst = 0.0
    if params.delta / params.gamma > 0:
        for lam in (1j * math.sqrt(params.delta / 2), -1j * math.sqrt(params.delta / 2)):
            sp = ds.spectral_sample(fd, lam, with_adjugates=True, opts=over)
            J = {(a, b): rh.jump_matrix(a, b, sp.s, sp.S, x, t, lam, params, sA=sp.sA, SA=sp.SA).J
                 for a in rh.REGIONS for b in rh.REGIONS}
            for a in rh.REGIONS:
                for b in rh.REGIONS:
                    for c in rh.REGIONS:
                        worst = max(worst, float(np.linalg.norm(J[a, b] @ J[b, c] - J[a, c])
                                                 / max(1.0, np.linalg.norm(J[a, c]))))
    out.append(Metric(S, "triple_point_cocycle", worst, tol["jump"]))
    return out


_GAMMA_EXPECTED = {
    "D1": ((3, 1, 1), (3, 3, 3), (3, 3, 3)),
    "D2": ((3, 2, 2), (3, 3, 3), (3, 3, 3)),
    "D3": ((3, 3, 3), (2, 3, 3), (2, 3, 3)),
    "D4": ((3, 3, 3), (1, 3, 3), (1, 3, 3)),
}


# --------------------------------------------------------------------------
# 6. asymptotics

def suite_asymptotics(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "asymptotics"
    tol = cfg["tolerances"]
    sm = cfg["sampling"]
    opts = quad_options(cfg)
    radii = [float(r) for r in sm["asymptotic_radii"]]
    items = [(tuple(p), tag) for p in sm["asymptotic_probes"] for tag in ("D2", "D3")]

    def run(item):
        (x, t), tag = item
        lams, Ms = rh.sample_ray(fd, x, t, rh.region_bisector(tag, fd.params), radii, opts)
        fit = rh.asymptotic_fit(lams, Ms, order=int(sm["asymptotic_order"]))
        G = rh.asymptotic_gauge(fd, x, t)
        env = max(float(np.linalg.norm(M - fit.C0, 2)) * abs(z) for z, M in zip(lams, Ms))
        return (float(np.linalg.norm(fit.C0 - np.eye(3), 2)), float(np.linalg.norm(fit.C0 - G, 2)), env,
                fit.residual)

    res = _pmap(run, items, threads)
    return [Metric(S, "C0_minus_identity", max(r[0] for r in res), tol["asymptotic"],
                   note="M tends to the gauge diag(a, B), not to I; see C0_minus_gauge"),
            Metric(S, "C0_minus_gauge", max(r[1] for r in res), tol["gauge"]),
            Metric(S, "envelope_lambda_times_M_minus_C0", max(r[2] for r in res), None, "info"),
            Metric(S, "fit_residual", max(r[3] for r in res), None, "info")]


# --------------------------------------------------------------------------
# 7. global relation

def perturb_boundary(fd: FieldData, cfg: dict) -> FieldData:
    sm = cfg["sampling"]
    bump = sm["perturbation_amp"] * np.exp(-((fd.t_grid - sm["perturbation_center"]) / sm["perturbation_width"]) ** 2)
    return fd.replace(g0=fd.g0 + bump)


def suite_global(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "global"
    tol = cfg["tolerances"]
    opts = quad_options(cfg)
    rep = rg.global_relation_residual(fd, opts=opts)
    bad = rg.global_relation_residual(perturb_boundary(fd, cfg), opts=opts)
    ratio = bad.max_residual / rep.max_residual if rep.max_residual > 0 else math.inf
    return [Metric(S, "max_masked_residual", rep.max_residual, tol["global_relation"],
                   note=f"{len(rep.lambdas)} lambda samples"),
            Metric(S, "median_masked_residual", rep.median_residual, None, "info"),
            Metric(S, "perturbed_over_consistent", float(ratio), tol["global_ratio"], ">=")]


# --------------------------------------------------------------------------
# 8. residues

def manufactured_residue_checks(cfg: dict, params: ModelParams) -> dict:
    sm = cfg["sampling"]
    box = tuple(sm["residue_box"])
    worst_rel = 0.0
    worst_wind = 0.0
    counts = {}
    for tag, lam0 in PLANTED_ZEROS.items():
        case = rg.ManufacturedCase(tag, lam0)
        f = lambda z, c=case, r=tag: rg.scalar_value(r, *c.spectral(z))  # noqa: E731
        for b in rg._region_boxes(box, tag, params):
            n, w, _ = rg.winding_number(f, b)
            worst_wind = max(worst_wind, abs(w - n))
        zs = rg.find_zeros(f, tag, box, params, which=rg.SCALAR_NAMES[tag])
        counts[tag] = len(zs)
        for x, t in ((0.0, 0.0), (0.7, 0.3)):
            for z in zs:
                for rec in rg.residue_coefficients(case.spectral, z, x, t, params):
                    d = rg.verify_residue_contour(lambda lam, c=case: c.M(lam, x, t, params), rec,
                                                  float(sm["residue_radius"]), int(sm["residue_nodes"]), params)
                    worst_rel = max(worst_rel, d)
    return {"counts": counts, "worst_relative": worst_rel, "winding_deviation": worst_wind}


def dataset_zero_counts(fd: FieldData, cfg: dict) -> dict:
    """Zeros of ``s_11`` in D2 and ``m_11(s)`` in D3 over the residue box."""
    box = tuple(cfg["sampling"]["residue_box"])
    opts = quad_options(cfg)
    f2 = lambda z: ds.compute_s(fd, z, columns=[0], opts=opts).mu[0, 0]  # noqa: E731
    f3 = lambda z: ds.compute_s(fd, z, columns=[0], opts=opts, adjugate=True).mu[0, 0]  # noqa: E731
    return {"D2": rg.find_zeros(f2, "D2", box, fd.params, which="s_11"),
            "D3": rg.find_zeros(f3, "D3", box, fd.params, which="m_11(s)")}


def suite_residues(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "residues"
    tol = cfg["tolerances"]
    man = manufactured_residue_checks(cfg, fd.params)
    wrong = sum(abs(n - 1) for n in man["counts"].values())
    out = [Metric(S, "formula_vs_contour_relative", man["worst_relative"], tol["residue"]),
           Metric(S, "planted_zero_count_errors", float(wrong), 0.0, note=str(man["counts"])),
           Metric(S, "winding_integer_deviation", man["winding_deviation"], tol["winding"])]
    zc = dataset_zero_counts(fd, cfg)
    for tag, zs in zc.items():
        out.append(Metric(S, f"dataset_zeros_{tag}", float(len(zs)), None, "info"))
    return out


# --------------------------------------------------------------------------
# 9. reconstruction

def reconstruction_probes(fd: FieldData, cfg: dict) -> list:
    """Seeded interior probes snapped to grid nodes, plus ``t = 0`` probes."""
    sm = cfg["sampling"]
    rng = np.random.default_rng(int(sm["seed"]) + 3)
    xs = rng.uniform(*sm["probe_x"], int(sm["probe_count"]))
    ts = rng.uniform(*sm["probe_t"], int(sm["probe_count"]))
    probes = []
    for i, (x, t) in enumerate(zip(xs, ts)):
        ix = int(np.clip(round(x / fd.dx), 1, fd.x_grid.size - 2))
        it = int(np.clip(round(t / fd.dt), 1, fd.t_grid.size - 1))
        probes.append((ix, it, "D2" if i % 2 == 0 else "D3"))
    for i, x in enumerate(sm["t0_probes"]):
        probes.append((int(round(x / fd.dx)), 0, "D2" if i % 2 == 0 else "D3"))
    return probes


def suite_reconstruction(fd: FieldData, cfg: dict, threads: int = 1) -> list:
    S = "reconstruction"
    tol = cfg["tolerances"]
    opts = quad_options(cfg)
    radii = [float(r) for r in cfg["sampling"]["radii"]]
    probes = reconstruction_probes(fd, cfg)
    uref = fd.u_int if fd.has_interior else None
    if uref is None:
        raise InteriorMissingError("the reconstruction suite needs a dataset with the interior solution")
    umax = float(np.abs(fd.u_int).max())
    vmax = float(np.abs(fd.v_int).max())

    def run(p):
        ix, it, tag = p
        r = rh.reconstruct_uv(fd, float(fd.x_grid[ix]), float(fd.t_grid[it]), radii=radii, opts=opts, region=tag)
        return r, fd.u_int[it, ix], fd.v_int[it, ix]

    res = _pmap(run, probes, threads)
    eu = [abs(r.u - u) / (umax or 1.0) for (r, u, v), p in zip(res, probes) if p[1] > 0]
    ev = [abs(r.v - v) / (vmax or 1.0) for (r, u, v), p in zip(res, probes) if p[1] > 0]
    e0 = [max(abs(r.u - u) / (umax or 1.0), abs(r.v - v) / (vmax or 1.0))
          for (r, u, v), p in zip(res, probes) if p[1] == 0]
    lit = [abs(r.literal[0] - u) / (umax or 1.0) for (r, u, v), p in zip(res, probes) if p[1] > 0]
    out = [Metric(S, "interior_probes", float(len(eu)), 20.0, ">="),
           Metric(S, "u_relative_error", float(max(eu)), tol["reconstruction"]),
           Metric(S, "v_relative_error", float(max(ev)), tol["reconstruction"]),
           Metric(S, "t0_relative_error", float(max(e0)) if e0 else 0.0, tol["reconstruction"]),
           Metric(S, "literal_formula_u_error", float(max(lit)), None, "info",
                  note="2i lim lam M12 without the gauge correction")]
    if vmax == 0.0:
        out.append(Metric(S, "v_channel_of_u_only_data", float(max(abs(r.v) for r, _, _ in res)), tol["channel"]))
    return out


SUITE_FUNCS = {
    "pde": suite_pde,
    "eigen": suite_eigen,
    "symmetry": suite_symmetry,
    "regions": suite_regions,
    "spectral": suite_spectral,
    "asymptotics": suite_asymptotics,
    "global": suite_global,
    "residues": suite_residues,
    "reconstruction": suite_reconstruction,
}


def run_suites(fd: FieldData, cfg: dict, suites=SUITES, threads: int = 1) -> list:
    metrics = []
    for name in suites:
        if name not in SUITE_FUNCS:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        metrics.extend(SUITE_FUNCS[name](fd, cfg, threads))
    return metrics
