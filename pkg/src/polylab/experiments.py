"""Experiment suites: orchestration across all modules with CSV/JSON reports.

Each suite returns a SuiteReport with named assertions, deterministic file
contents (fixed seeds reproduce byte-identical CSVs), and a summary dict.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import boundary, dirac, dyadic, geometry, metrics, spin
from .scenario import Scenario, builtin_scenario, scenario_objects
from .smoothing import mesh_sigma, smooth_surface


def fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteReport:
    suite: str
    assertions: list = field(default_factory=list)
    files: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name: str, passed, detail="") -> None:
        self.assertions.append(Assertion(name, bool(passed), str(detail)))


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


def run_algebra(ns=(3, 5, 7), trials: int = 10000, seed: int = 0) -> SuiteReport:
    """Generator invariants for each n plus randomised boundary-operator checks."""
    t0 = time.time()
    rep_rows = []
    report = SuiteReport("check-algebra")
    for n in ns:
        rep = spin.build_spin_rep(n)
        res = spin.rep_residuals(rep)
        anti = spin.anticommutant_dim(rep)
        rank = spin.product_span_rank(rep)
        rep_rows.append((n, rep.m, res["skew"], res["clifford"], res["volume"], anti, rank))
        report.check(f"n={n}_invariants", max(res.values()) < 1e-13, f"max residual {max(res.values()):.3e}")
        report.check(f"n={n}_anticommutant", anti == 0, f"dim {anti}")
        report.check(f"n={n}_span", rank == rep.m ** 2, f"rank {rank} vs {rep.m ** 2}")
    report.files["algebra_invariants.csv"] = _csv(
        ["n", "m", "skew", "clifford", "volume", "anticommutant_dim", "span_rank"], rep_rows
    )

    rep = spin.build_spin_rep(3)
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(("chi_sq", "chi_sa", "B_sa", "commute", "bound", "frame"), 0.0)
    dims_ok = True
    for _ in range(trials):
        f = boundary.random_frame(rep, rng)
        worst["frame"] = max(worst["frame"], max(boundary.frame_residuals(f).values()))
        S = rng.normal(size=(rep.m, rep.m)) + 1j * rng.normal(size=(rep.m, rep.m))
        T = rng.normal(size=(rep.m, rep.m)) + 1j * rng.normal(size=(rep.m, rep.m))
        cs = boundary.chi_apply(f, S)
        worst["chi_sq"] = max(worst["chi_sq"], np.abs(boundary.chi_apply(f, cs) - S).max())
        worst["chi_sa"] = max(
            worst["chi_sa"], abs(boundary.tuple_inner(cs, T) - boundary.tuple_inner(S, boundary.chi_apply(f, T)))
        )
        bs = boundary.B_apply(f, S)
        worst["B_sa"] = max(
            worst["B_sa"], abs(boundary.tuple_inner(bs, T) - boundary.tuple_inner(S, boundary.B_apply(f, T)))
        )
        worst["commute"] = max(worst["commute"], np.abs(boundary.chi_apply(f, bs) - boundary.B_apply(f, cs)).max())
        excess = abs(boundary.tuple_inner(bs, S)) - boundary.trace_norm(f.dN) * float(np.sum(np.abs(S) ** 2))
        worst["bound"] = max(worst["bound"], excess)
        if boundary.chi_eigenspace_dims(f) != (rep.m ** 2 // 2, rep.m ** 2 // 2):
            dims_ok = False
    scale_ok = all(v < 1e-11 for k, v in worst.items())
    report.check("boundary_residuals", scale_ok, ", ".join(f"{k}={v:.2e}" for k, v in worst.items()))
    report.check("boundary_eigendims", dims_ok, f"(+, -) = ({rep.m**2//2}, {rep.m**2//2}) over {trials} frames")
    report.files["boundary_trials.csv"] = _csv(
        ["trials"] + list(worst), [(trials, *worst.values())]
    )
    report.summary = {"trials": trials, "worst": {k: float(v) for k, v in worst.items()}}
    report.elapsed = time.time() - t0
    return report


# ---------------------------------------------------------------------------


def _geometry_csv(geo: geometry.SurfaceGeometry) -> str:
    n = geo.x.shape[1]
    header = (
        [f"x{j+1}" for j in range(n)]
        + [f"nu{j+1}" for j in range(n)]
        + [f"N{j+1}" for j in range(n)]
        + ["H", "dN_trace_norm", "V", "regime"]
    )
    rows = []
    for i in range(len(geo.x)):
        rows.append(
            tuple(geo.x[i])
            + tuple(geo.nu[i])
            + tuple(geo.N[i])
            + (geo.H[i], geo.dN_trace_norm[i], geo.V[i], geometry.REGIME_NAMES[int(geo.regime[i])])
        )
    return _csv(header, rows)


def _mesh_csv(mesh) -> str:
    n = mesh.points.shape[1]
    header = [f"x{j+1}" for j in range(n)] + [f"normal{j+1}" for j in range(n)] + ["weight"]
    rows = [tuple(mesh.points[i]) + tuple(mesh.euclid_normals[i]) + (mesh.weights[i],) for i in range(len(mesh.points))]
    return _csv(header, rows)


def run_geometry(sc: Scenario) -> SuiteReport:
    """Per-point boundary geometry for every rate in the sweep plus FD cross-checks."""
    t0 = time.time()
    report = SuiteReport("geometry")
    p, metric = scenario_objects(sc)
    angle = geometry.matching_angle_deficit(metric, p, np.random.default_rng(sc.seed))
    report.summary["matching_angle_deficit"] = angle

    max_abs_v = {}
    min_bound = np.inf
    for lam in sc.lambdas:
        surf = smooth_surface(p, lam)
        mesh = mesh_sigma(surf, sc.resolution)
        geo = geometry.sigma_geometry(metric, surf, mesh.points, regime_r=1.0)
        max_abs_v[lam] = float(np.abs(geo.V).max())
        min_bound = min(min_bound, float((geo.H - geo.dN_trace_norm - geo.V).min()))
        report.files[f"geometry_lam{fmt(lam)}.csv"] = _geometry_csv(geo)
        report.files[f"mesh_lam{fmt(lam)}.csv"] = _mesh_csv(mesh)
        if metric.name == "euclid":
            flat_v = float(np.abs(geo.V).max())
            flat_h = float(np.abs(geo.H - geo.dN_trace_norm).max())
            report.check(
                f"flat_cancellation_lam{fmt(lam)}",
                flat_v < 1e-9 and flat_h < 1e-9,
                f"max|V|={flat_v:.2e}, max|H-dNtr|={flat_h:.2e}",
            )
    report.check("deficit_bound", min_bound >= -1e-8, f"min(H - dNtr - V) = {min_bound:.3e}")

    lam = min(sc.lambdas)
    surf = smooth_surface(p, lam)
    mesh = mesh_sigma(surf, max(24, sc.resolution // 2))
    rng = np.random.default_rng(sc.seed + 1)
    idx = rng.choice(len(mesh.points), size=min(100, len(mesh.points)), replace=False)
    pts = mesh.points[idx]
    geo = geometry.sigma_geometry(metric, surf, pts)
    h_err = float(np.abs(geo.H - geometry.mean_curvature_fd(metric, surf, pts)).max())
    dn_err = float(np.abs(geo.dN - geometry.dN_fd(metric, surf, pts, geo.frame)).max())
    report.check("fd_oracle", h_err < 1e-4 and dn_err < 1e-4, f"H err {h_err:.2e}, dN err {dn_err:.2e}")
    report.summary.update({"max_abs_V": max_abs_v, "min_deficit_bound": min_bound,
                           "fd_H_err": h_err, "fd_dN_err": dn_err})
    report.elapsed = time.time() - t0
    return report


# ---------------------------------------------------------------------------


def run_asymptotics(sc: Scenario) -> SuiteReport:
    """Deficit sup and scale-weighted norms across the rate sweep."""
    t0 = time.time()
    report = SuiteReport("asymptotics")
    p, metric = scenario_objects(sc)
    angle = geometry.matching_angle_deficit(metric, p, np.random.default_rng(sc.seed))
    face_h = geometry.min_face_mean_curvature(metric, p, np.random.default_rng(sc.seed))
    # decay is only asserted under both hypotheses behind it
    matching = angle < 1e-10 and face_h > -1e-9

    rows = []
    ratios, morreys = [], []
    centers, radii = geometry.default_ball_family(p, sc.ball_grid, sc.ball_radii_levels)
    for lam in sc.lambdas:
        d = geometry.v_deficit_sup(metric, p, lam, sc.resolution)
        md = geometry.morrey_deficit(metric, p, lam, sc.sigma, sc.resolution, centers, radii)
        ratios.append(d["ratio"])
        morreys.append(md)
        rows.append((lam, d["sup"], d["ratio"], md))
    report.files["asymptotics.csv"] = _csv(["lambda", "sup_neg_V", "ratio_to_lambda", "morrey_deficit"], rows)
    report.summary = {
        "matching_angle_deficit": angle,
        "min_face_mean_curvature": face_h,
        "ratios": ratios,
        "morrey": morreys,
    }
    if matching:
        mono = all(ratios[i + 1] <= ratios[i] + 1e-12 for i in range(len(ratios) - 1))
        report.check("ratio_nonincreasing", mono, f"ratios {['%.3e' % r for r in ratios]}")
        halved = morreys[-1] <= 0.5 * morreys[0] + 1e-15
        report.check("morrey_halved", halved, f"{morreys[0]:.3e} -> {morreys[-1]:.3e}")
    else:
        report.check(
            "diagnostic_only", True,
            f"angle deficit {angle:.3e}, min face curvature {face_h:.3e}; no decay asserted",
        )
    report.elapsed = time.time() - t0
    return report


# ---------------------------------------------------------------------------


def run_fefferman_phong(sc: Scenario, exact_trials: int = 100) -> SuiteReport:
    """Exactness spot-checks plus the randomized weighted-trace-ratio sweep."""
    t0 = time.time()
    report = SuiteReport("fefferman-phong")
    rng = np.random.default_rng(sc.seed)
    sigma, tau = sc.sigma, sc.tau

    exact_ok = True
    for _ in range(exact_trials):
        V = dyadic.GridFunction(rng.uniform(size=(32, 32)))
        f = dyadic.GridFunction(rng.normal(size=(32, 32)))
        if dyadic.morrey_norm(V, sigma) != dyadic.morrey_norm_brute(V, sigma):
            exact_ok = False
        if not np.array_equal(dyadic.weight_W(V, sigma, 0.5).values, dyadic.weight_W_brute(V, sigma, 0.5).values):
            exact_ok = False
        if not np.array_equal(dyadic.oscillation_g(f).values, dyadic.oscillation_g_brute(f).values):
            exact_ok = False
    report.check("tree_vs_bruteforce_exact", exact_ok, f"{exact_trials} random inputs at resolution 32")

    rows = []
    ratios = {4: [], 5: []}
    aux_acc = {4: {"tau_mean": [], "mean_bound": [], "oscillation": [], "gradient": []},
                 5: {"tau_mean": [], "mean_bound": [], "oscillation": [], "gradient": []}}
    norm_dev = 0.0
    for trial in range(sc.trials):
        # per-trial seeds: trials are independent of sweep order
        trial_seed = sc.seed * 1000003 + trial
        trng = np.random.default_rng(trial_seed)
        sw = dyadic.random_spike_weight(2, trng).normalized(sigma, 5)
        F = dyadic.random_trig_field(3, trng)
        norm_dev = max(norm_dev, abs(dyadic.morrey_norm(sw.sample(5), sigma) - 1.0))
        row = [trial, trial_seed]
        for level in (4, 5):
            V = sw.sample(level)
            r = dyadic.halfspace_trace_ratio(V, F, sigma, check=False)
            ratios[level].append(r["ratio"])
            lr = dyadic.weight_estimate_ratios(V, F, sigma, tau, rng=trng)
            W = dyadic.weight_W(V, sigma)
            a4 = W.integrate() * V.diam()   # unit base cube: mean of W over diam^-1
            aux_acc[level]["tau_mean"].append(lr["tau_mean"])
            aux_acc[level]["mean_bound"].append(a4)
            aux_acc[level]["oscillation"].append(lr["oscillation"])
            aux_acc[level]["gradient"].append(lr["gradient"])
            row += [r["ratio"], lr["tau_mean"], a4, lr["oscillation"], lr["gradient"]]
        rows.append(tuple(row))
    report.files["fp_sweep.csv"] = _csv(
        ["trial", "seed",
         "ratio_L4", "tau_mean_L4", "mean_bound_L4", "oscillation_L4", "gradient_L4",
         "ratio_L5", "tau_mean_L5", "mean_bound_L5", "oscillation_L5", "gradient_L5"],
        rows,
    )

    report.check("weights_normalized", norm_dev < 1e-9, f"max |morrey - 1| = {norm_dev:.2e}")
    finite = all(np.all(np.isfinite(ratios[lv])) for lv in (4, 5))
    report.check("ratios_finite", finite, f"{sc.trials} trials")
    m4, m5 = max(ratios[4]), max(ratios[5])
    stable = m5 <= 2.0 * m4 and m4 <= 2.0 * m5
    report.check("max_ratio_stable", stable, f"max L4 {m4:.4g}, max L5 {m5:.4g}")
    # recorded bound for the seeded family (first-run max was 0.069)
    report.check("max_ratio_pinned", max(m4, m5) <= 0.2, f"max ratio {max(m4, m5):.4g} vs recorded bound 0.2")
    for key in ("tau_mean", "mean_bound", "oscillation", "gradient"):
        a, b = max(aux_acc[4][key]), max(aux_acc[5][key])
        ok = np.isfinite(a) and np.isfinite(b) and b <= 2.0 * a + 1e-12 and a <= 2.0 * b + 1e-12
        report.check(f"aux_{key}_stable", ok, f"max L4 {a:.4g}, max L5 {b:.4g}")

    ball = dyadic.ball_trace_ratio(lambda d: 0.05 + 0.02 * d[:, 0] ** 2, dyadic.random_trig_field(3, rng), sigma)
    report.check("ball_ratio_finite", np.isfinite(ball["ratio"]), f"ratio {ball['ratio']:.4g}, condition {ball['condition']:.4g}")
    report.summary = {
        "max_ratio": {"L4": m4, "L5": m5},
        "aux_max": {k: max(aux_acc[5][k]) for k in aux_acc[5]},
        "ball": {k: float(v) for k, v in ball.items()},
    }
    report.elapsed = time.time() - t0
    return report


# ---------------------------------------------------------------------------


def run_dirac(sc: Scenario) -> SuiteReport:
    """Flat-metric spinor suite on the scenario polytope (metric ignored)."""
    t0 = time.time()
    report = SuiteReport("dirac-flat")
    p, _ = scenario_objects(sc)
    rep = spin.build_spin_rep(3)
    rng = np.random.default_rng(sc.seed)

    lam = 40.0
    surf = smooth_surface(p, lam)

    out0 = dirac.kernel_least_squares(rep, surf, 0)
    z0 = out0["gram"]
    report.check("kernel_const_residual", out0["residual"] < 1e-10, f"residual {out0['residual']:.3e}")
    report.check("kernel_const_gram", np.abs(z0 - np.eye(rep.m)).max() < 1e-8,
                 f"|z - id| = {np.abs(z0 - np.eye(rep.m)).max():.3e}")

    outd = dirac.kernel_least_squares(rep, surf, sc.degree)
    zd = outd["gram"]
    comm = dirac.gram_commutators(rep, zd, p)
    report.check("kernel_poly_residual", outd["residual"] < 1e-8, f"residual {outd['residual']:.3e}")
    report.check("kernel_poly_nonconstant", outd["nonconstant_max"] < 1e-6,
                 f"max nonconstant coeff {outd['nonconstant_max']:.3e}")
    report.check("kernel_gram_identity", np.abs(zd - np.eye(rep.m)).max() < 1e-8,
                 f"|z - id| = {np.abs(zd - np.eye(rep.m)).max():.3e}")
    report.check("gram_face_commutators", comm < 1e-8, f"max commutator {comm:.3e}")

    ints = dirac.volume_monomial_integrals(surf, 48, max(2, 2 * sc.degree))
    G = dirac.monomial_gram(outd["field"].basis, ints)
    grad_l2 = dirac.gradient_l2(outd["field"], G)
    report.check("minimizer_parallel", grad_l2 < 1e-6, f"gradient energy {grad_l2:.3e}")

    # pointwise operator identities over 10^3 mesh points
    mesh = mesh_sigma(surf, 24)
    pts = mesh.points[:: max(1, len(mesh.points) // 1000)][:1000]
    f2 = dirac.random_field(rep, 2, rng)
    nh, _ = dirac.gauss_map_jacobian(surf, pts)
    Anu = dirac.direction_matrices(rep, nh)

    def chi_of(vals):
        return -np.einsum("pab,pbc,pcd->pad", Anu, vals, Anu)

    ds_vals = dirac.boundary_dirac_apply(rep, surf, f2, pts)
    id1 = np.abs(dirac.boundary_dirac_of_chi(rep, surf, f2, pts) + chi_of(ds_vals)
                 + dirac.B_field(rep, surf, f2, pts)).max()
    report.check("chirality_derivative_identity", id1 < 1e-8, f"residual {id1:.3e} over {len(pts)} points")
    A_s = ds_vals + 0.5 * chi_of(dirac.B_field(rep, surf, f2, pts))
    chi_vals = dirac.chi_field(rep, surf, f2, pts)
    A_chi = dirac.boundary_dirac_of_chi(rep, surf, f2, pts) + 0.5 * chi_of(
        dirac.B_field(rep, surf, f2, pts, values=chi_vals))
    id2 = np.abs(chi_of(A_s) + A_chi).max()
    report.check("adjusted_operator_anticommutes", id2 < 1e-8, f"residual {id2:.3e}")

    # integrated square identity: constant field exactly, refinement order for linear
    sh = dirac.constant_field(rep)
    wz_const = dirac.weitzenboeck_residual(rep, surf, sh, mesh, 24)
    report.check("integral_identity_constant", abs(wz_const["lhs"]) < 1e-12 and abs(wz_const["rhs"]) < 1e-12,
                 f"lhs {wz_const['lhs']:.2e}, rhs {wz_const['rhs']:.2e}")
    surf_sm = smooth_surface(p, 20.0)
    mesh_sm = mesh_sigma(surf_sm, 128)
    flin = dirac.random_field(rep, 1, rng)
    residuals = [dirac.weitzenboeck_residual(rep, surf_sm, flin, mesh_sm, r)["residual"] for r in (16, 32, 64)]
    order = 0.5 * np.log2(residuals[0] / residuals[2])
    report.check("integral_identity_order", order >= 0.9,
                 f"residuals {['%.3e' % r for r in residuals]}, fitted order {order:.2f}")

    # boundary-condition fields make the boundary remainder nonpositive
    svals = sh(mesh.points)
    ds_sh = dirac.boundary_dirac_apply(rep, surf, sh, mesh.points)
    nh_m, _ = dirac.gauss_map_jacobian(surf, mesh.points)
    Anu_m = dirac.direction_matrices(rep, nh_m)
    chi_sh = -np.einsum("pab,pbc,pcd->pad", Anu_m, svals, Anu_m)
    pair = dirac.tuple_pairing(ds_sh, svals - chi_sh)
    geo = geometry.sigma_geometry(metrics.euclidean(3), surf, mesh.points)
    mass = np.einsum("pab,pab->p", svals, np.conj(svals)).real
    rhs = float(np.sum(mesh.weights * (pair.real - 0.5 * (geo.H - geo.dN_trace_norm) * mass)))
    report.check("fixed_field_boundary_sign", rhs <= 1e-8, f"assembled boundary term {rhs:.3e}")

    worst_face = max(dirac.second_fundamental_form_check(rep, sh, p, i) for i in range(p.nfaces))
    report.check("face_identity_constant_field", worst_face == 0.0, f"max defect {worst_face:.3e}")

    coeff_rows = []
    for Mi, e in enumerate(outd["field"].basis):
        for a in range(rep.m):
            for b in range(rep.m):
                c = outd["field"].coeffs[Mi, a, b]
                coeff_rows.append(("".join(map(str, e)), a, b, c.real, c.imag))
    report.files["dirac_kernel_coeffs.csv"] = _csv(["monomial", "alpha", "beta", "re", "im"], coeff_rows)
    report.files["dirac_report.txt"] = "".join(
        f"{k} = {fmt(v)}\n"
        for k, v in [
            ("kernel_const_residual", out0["residual"]),
            ("kernel_poly_residual", outd["residual"]),
            ("kernel_poly_nonconstant", outd["nonconstant_max"]),
            ("gram_identity_error", np.abs(zd - np.eye(rep.m)).max()),
            ("gram_commutator", comm),
            ("gradient_energy", grad_l2),
            ("identity_residual", id1),
            ("anticommute_residual", id2),
            ("weitzenboeck_order", order),
        ]
    )
    report.summary = {
        "kernel_residuals": {"constant": out0["residual"], "poly": outd["residual"]},
        "weitzenboeck_order": float(order),
        "penalty": outd["penalty"],
    }
    report.elapsed = time.time() - t0
    return report


# ---------------------------------------------------------------------------

SUITES = ("check-algebra", "geometry", "asymptotics", "fefferman-phong", "dirac-flat", "report")

_DEFAULT_SCENARIO = {
    "check-algebra": "cube-euclid",
    "geometry": "cube-euclid",
    "asymptotics": "cube-conformal-centered",
    "fefferman-phong": "cube-euclid",
    "dirac-flat": "cube-euclid",
    "report": "cube-euclid",
}


def default_scenario(name: str) -> Scenario:
    return builtin_scenario(_DEFAULT_SCENARIO.get(name, "cube-euclid"))


def run_suite(name: str, sc: Scenario | None = None) -> SuiteReport:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choices: {SUITES}")
    if sc is None:
        sc = default_scenario(name)
    if name == "check-algebra":
        return run_algebra(trials=max(sc.trials, 1), seed=sc.seed)
    if name == "geometry":
        return run_geometry(sc)
    if name == "asymptotics":
        return run_asymptotics(sc)
    if name == "fefferman-phong":
        return run_fefferman_phong(sc)
    if name == "dirac-flat":
        return run_dirac(sc)
    # report: run everything
    t0 = time.time()
    combined = SuiteReport("report")
    for sub in SUITES[:-1]:
        r = run_suite(sub, sc)
        combined.assertions.extend(
            Assertion(f"{sub}:{a.name}", a.passed, a.detail) for a in r.assertions
        )
        for fname, content in r.files.items():
            combined.files[f"{sub}_{fname}"] = content
        combined.summary[sub] = r.summary
    combined.elapsed = time.time() - t0
    return combined
