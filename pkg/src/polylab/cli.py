"""Thin command-line client for the suite service.

All commands go through the HTTP interface: against a remote server when
--server is given, otherwise against an in-process instance of the same
app.  Exit codes: 0 all assertions passed, 1 an assertion failed, 2 input
or transport error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

SUITE_COMMANDS = ("check-algebra", "geometry", "asymptotics", "fefferman-phong", "dirac-flat", "report")


def _client(server: str | None):
    import httpx

    if server:
        return httpx.Client(base_url=server, timeout=httpx.Timeout(3600.0, connect=30.0))
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polylab", description=__doc__)
    ap.add_argument("--server", default=None, help="base URL of a running service (default: in-process)")
    sub = ap.add_subparsers(dest="command", required=True)

    for name in SUITE_COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} suite")
        sp.add_argument("--scenario", type=Path, default=None, help="scenario file")
        sp.add_argument("--builtin", default=None, help="builtin scenario name")
        sp.add_argument("--lambda", dest="lambdas", default=None,
                        help="comma or space separated rate sweep, e.g. 25,50,100")
        sp.add_argument("--resolution", type=int, default=None)
        sp.add_argument("--sigma", type=float, default=None)
        sp.add_argument("--tau", type=float, default=None)
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--degree", type=int, default=None)
        sp.add_argument("--out", type=Path, default=Path("polylab_out"))

    sv = sub.add_parser("validate", help="parse and validate a scenario file")
    sv.add_argument("--scenario", type=Path, required=True)

    ls = sub.add_parser("scenarios", help="list builtin scenarios")

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return ap


def _print_error(payload) -> None:
    detail = payload.get("detail", payload)
    if isinstance(detail, dict):
        msg = detail.get("error", str(detail))
        kind = detail.get("kind", "error")
        print(f"error ({kind}): {msg}", file=sys.stderr)
    else:
        print(f"error: {detail}", file=sys.stderr)


def _run_suite(args) -> int:
    scenario_text = None
    if args.scenario is not None:
        try:
            scenario_text = args.scenario.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read scenario file: {exc}", file=sys.stderr)
            return 2
    overrides = {
        "lambdas": [float(t) for t in args.lambdas.replace(",", " ").split()] if args.lambdas else None,
        "resolution": args.resolution,
        "sigma": args.sigma,
        "tau": args.tau,
        "trials": args.trials,
        "seed": args.seed,
        "degree": args.degree,
    }
    body = {"scenario": scenario_text, "builtin": args.builtin, "overrides": overrides}
    with _client(args.server) as client:
        resp = client.post(f"/suites/{args.command}", json=body)
    if resp.status_code != 200:
        _print_error(resp.json())
        return 2
    data = resp.json()

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    for fname, content in data["files"].items():
        (out / fname).write_text(content, encoding="utf-8")
    (out / f"{data['suite']}_summary.json").write_text(
        json.dumps({k: data[k] for k in ("suite", "passed", "elapsed", "summary")},
                   indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    for a in data["assertions"]:
        mark = "ok " if a["passed"] else "FAIL"
        print(f"[{mark}] {a['name']}: {a['detail']}")
    npass = sum(a["passed"] for a in data["assertions"])
    status = "PASS" if data["passed"] else "FAIL"
    print(f"suite {data['suite']}: {status} ({npass}/{len(data['assertions'])}) in {data['elapsed']:.1f}s")
    print(f"wrote {len(data['files']) + 1} files to {out}")
    return data["exit_code"]


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    if args.command == "scenarios":
        with _client(args.server) as client:
            resp = client.get("/scenarios")
        for name in resp.json()["builtin"]:
            print(name)
        return 0

    if args.command == "validate":
        try:
            text = args.scenario.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read scenario file: {exc}", file=sys.stderr)
            return 2
        with _client(args.server) as client:
            resp = client.post("/scenario/validate", json={"scenario": text})
        if resp.status_code != 200:
            _print_error(resp.json())
            return 2
        info = resp.json()
        print(json.dumps({k: info[k] for k in ("n", "faces", "metric_family", "lambdas", "resolution")}, indent=2))
        return 0

    return _run_suite(args)


if __name__ == "__main__":
    sys.exit(main())
