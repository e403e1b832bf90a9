"""Scenario text format: polytope, metric, sweep and ball-family settings.

Flat sections with ``key = value`` lines::

    [polytope]
    n = 3
    halfspace = 1 0 0 ; -1

    [metric]
    family = conformal
    phi = 0.2*(x1-0.5)^2

    [sweep]
    lambda = 25 50 100 200
    resolution = 64
    sigma = 1.2
    tau = 1.1
    trials = 200
    seed = 0
    degree = 2

    [balls]
    grid = 4
    radii_levels = 8

Parsing round-trips: parse -> serialize -> parse is the identity.  Metric
families: euclid, conformal (phi expression), constant (matrix rows), and
entries (explicit g11, g12, ... expressions for the upper triangle).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import expressions as ex
from . import metrics
from .polytope import make_polytope


class ScenarioError(ValueError):
    def __init__(self, msg: str, line: int = 0):
        super().__init__(f"{msg} (line {line})" if line else msg)
        self.line = line


@dataclass(frozen=True)
class Scenario:
    n: int
    halfspaces: tuple            # ((a components...), b) per face
    metric_family: str
    metric_params: tuple         # sorted (key, value) pairs; expressions as AST nodes
    lambdas: tuple = (25.0, 50.0, 100.0, 200.0)
    resolution: int = 64
    sigma: float = 1.2
    tau: float = 1.1
    trials: int = 200
    seed: int = 0
    degree: int = 2
    ball_grid: int = 4
    ball_radii_levels: int = 8

    def params(self) -> dict:
        return dict(self.metric_params)

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "lambdas" in kw:
            kw["lambdas"] = tuple(float(v) for v in kw["lambdas"])
        return replace(self, **kw)


_DEFAULTS = Scenario(3, (), "euclid", ())


def _parse_floats(text: str, line: int):
    try:
        return [float(t) for t in text.split()]
    except ValueError:
        raise ScenarioError(f"expected numbers, got {text!r}", line) from None


def parse_scenario(text: str, validate: bool = True) -> Scenario:
    """Parse scenario text; raises ScenarioError with the offending line."""
    section = None
    n = None
    halfspaces = []
    metric_family = None
    metric_params = {}
    sweep = {}
    balls = {}
    matrix_rows = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError("malformed section header", lineno)
            section = line[1:-1].strip().lower()
            if section not in ("polytope", "metric", "sweep", "balls"):
                raise ScenarioError(f"unknown section {section!r}", lineno)
            continue
        if "=" not in line:
            raise ScenarioError("expected key = value", lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if section is None:
            raise ScenarioError("key outside any section", lineno)

        if section == "polytope":
            if key == "n":
                n = int(value)
            elif key == "halfspace":
                if ";" not in value:
                    raise ScenarioError("halfspace needs 'a1 .. an ; b'", lineno)
                a_txt, _, b_txt = value.partition(";")
                a = _parse_floats(a_txt, lineno)
                b = _parse_floats(b_txt, lineno)
                if len(b) != 1:
                    raise ScenarioError("halfspace offset must be a single number", lineno)
                halfspaces.append((tuple(a), b[0], lineno))
            else:
                raise ScenarioError(f"unknown key {key!r} in [polytope]", lineno)
        elif section == "metric":
            if key == "family":
                if value not in ("euclid", "conformal", "constant", "entries"):
                    raise ScenarioError(f"unknown metric family {value!r}", lineno)
                metric_family = value
            elif key == "phi":
                metric_params["phi"] = (value, lineno)
            elif key == "matrix":
                matrix_rows = (value, lineno)
            elif len(key) == 3 and key.startswith("g") and key[1:].isdigit():
                metric_params[key] = (value, lineno)
            else:
                raise ScenarioError(f"unknown key {key!r} in [metric]", lineno)
        elif section == "sweep":
            if key == "lambda":
                sweep["lambdas"] = tuple(_parse_floats(value, lineno))
            elif key in ("resolution", "trials", "seed", "degree"):
                sweep[key] = int(value)
            elif key in ("sigma", "tau"):
                sweep[key] = float(value)
            else:
                raise ScenarioError(f"unknown key {key!r} in [sweep]", lineno)
        elif section == "balls":
            if key == "grid":
                balls["ball_grid"] = int(value)
            elif key == "radii_levels":
                balls["ball_radii_levels"] = int(value)
            else:
                raise ScenarioError(f"unknown key {key!r} in [balls]", lineno)

    if n is None:
        raise ScenarioError("missing n in [polytope]")
    if not halfspaces:
        raise ScenarioError("no halfspaces given")
    for a, _, lineno in halfspaces:
        if len(a) != n:
            raise ScenarioError(f"halfspace has {len(a)} coefficients, expected {n}", lineno)
    if metric_family is None:
        metric_family = "euclid"

    params = {}
    if metric_family == "conformal":
        if "phi" not in metric_params:
            raise ScenarioError("conformal metric needs phi = <expression>")
        txt, lineno = metric_params["phi"]
        try:
            params["phi"] = ex.parse_expression(txt, n, line=lineno)
        except ex.ExpressionError as e:
            raise ScenarioError(f"bad phi expression: {e}", lineno) from None
    elif metric_family == "constant":
        if matrix_rows is None:
            raise ScenarioError("constant metric needs matrix = r1 ; r2 ; ...")
        txt, lineno = matrix_rows
        rows = [_parse_floats(r, lineno) for r in txt.split(";")]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ScenarioError(f"matrix must be {n} rows of {n} entries", lineno)
        params["matrix"] = tuple(tuple(r) for r in rows)
    elif metric_family == "entries":
        for key, (txt, lineno) in sorted(metric_params.items()):
            if key == "phi":
                raise ScenarioError("phi is only valid for the conformal family", lineno)
            i, j = int(key[1]) - 1, int(key[2]) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise ScenarioError(f"entry {key} out of range", lineno)
            try:
                params[key] = ex.parse_expression(txt, n, line=lineno)
            except ex.ExpressionError as e:
                raise ScenarioError(f"bad entry expression: {e}", lineno) from None

    sc = Scenario(
        n=n,
        halfspaces=tuple((a, b) for a, b, _ in halfspaces),
        metric_family=metric_family,
        metric_params=tuple(sorted(params.items())),
        **sweep,
        **balls,
    )
    if validate:
        scenario_objects(sc)
    return sc


def serialize_scenario(sc: Scenario) -> str:
    out = ["[polytope]", f"n = {sc.n}"]
    for a, b in sc.halfspaces:
        out.append("halfspace = " + " ".join(repr(float(x)) for x in a) + " ; " + repr(float(b)))
    out += ["", "[metric]", f"family = {sc.metric_family}"]
    for key, value in sc.metric_params:
        if key == "matrix":
            out.append("matrix = " + " ; ".join(" ".join(repr(float(x)) for x in row) for row in value))
        else:
            out.append(f"{key} = {ex.to_text(value)}")
    out += [
        "",
        "[sweep]",
        "lambda = " + " ".join(repr(float(v)) for v in sc.lambdas),
        f"resolution = {sc.resolution}",
        f"sigma = {sc.sigma!r}",
        f"tau = {sc.tau!r}",
        f"trials = {sc.trials}",
        f"seed = {sc.seed}",
        f"degree = {sc.degree}",
        "",
        "[balls]",
        f"grid = {sc.ball_grid}",
        f"radii_levels = {sc.ball_radii_levels}",
    ]
    return "\n".join(out) + "\n"


def scenario_objects(sc: Scenario):
    """Build the polytope and metric field, validating SPD at the interior point."""
    p = make_polytope([(np.array(a), b) for a, b in sc.halfspaces], sc.n)
    params = sc.params()
    if sc.metric_family == "euclid":
        m = metrics.euclidean(sc.n)
    elif sc.metric_family == "conformal":
        m = metrics.conformal(params["phi"], sc.n)
    elif sc.metric_family == "constant":
        m = metrics.constant(np.array(params["matrix"]))
    else:
        entries = {(int(k[1]) - 1, int(k[2]) - 1): v for k, v in params.items()}
        m = metrics.from_entries(entries, sc.n)
    gi = m(p.interior_point[None])[0]
    eig = np.linalg.eigvalsh(0.5 * (gi + gi.T))
    if eig.min() <= 0:
        raise metrics.MetricError("metric is not positive definite at the interior point")
    return p, m


# canonical scripted scenarios ------------------------------------------------

_CUBE = """[polytope]
n = 3
halfspace = 1 0 0 ; -1
halfspace = -1 0 0 ; 0
halfspace = 0 1 0 ; -1
halfspace = 0 -1 0 ; 0
halfspace = 0 0 1 ; -1
halfspace = 0 0 -1 ; 0
"""

_SIMPLEX = """[polytope]
n = 3
halfspace = -1 0 0 ; 0
halfspace = 0 -1 0 ; 0
halfspace = 0 0 -1 ; 0
halfspace = 0.5773502691896258 0.5773502691896258 0.5773502691896258 ; -0.5773502691896258
"""

_SHEARED = """[polytope]
n = 3
halfspace = 1 0 0 ; -1
halfspace = -1 0 0 ; 0
halfspace = 0 1 0 ; -1
halfspace = 0 -1 0 ; 0
halfspace = 0 0 -1 ; 0
halfspace = 0.4472135954999579 0 0.8944271909999159 ; -1.118033988749895
"""

_SWEEP = """
[sweep]
lambda = 25 50 100 200
resolution = 64
sigma = 1.2
tau = 1.1
trials = 200
seed = 0
degree = 2
"""

BUILTIN_SCENARIOS = {
    "cube-euclid": _CUBE + "\n[metric]\nfamily = euclid\n" + _SWEEP,
    "simplex-euclid": _SIMPLEX + "\n[metric]\nfamily = euclid\n" + _SWEEP,
    "cube-conformal-centered": _CUBE + "\n[metric]\nfamily = conformal\nphi = 0.2*(x1-0.5)^2\n" + _SWEEP,
    "cube-conformal-mixed": _CUBE + "\n[metric]\nfamily = conformal\nphi = 0.05*x1*x2\n" + _SWEEP,
    "cube-constant-spd": _CUBE
    + "\n[metric]\nfamily = constant\nmatrix = 1.3 0.2 0 ; 0.2 1.0 0.1 ; 0 0.1 0.8\n"
    + _SWEEP,
    "sheared-violating": _SHEARED
    + "\n[metric]\nfamily = constant\nmatrix = 1 0 0 ; 0 1 0 ; 0 0 4\n"
    + _SWEEP,
}


def builtin_scenario(name: str) -> Scenario:
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError(f"unknown builtin scenario {name!r}; choices: {sorted(BUILTIN_SCENARIOS)}")
    return parse_scenario(BUILTIN_SCENARIOS[name])
