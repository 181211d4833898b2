"""Command-line client for the majorate service.

The CLI builds a JSON request, posts it to the FastAPI app (in-process by
default, or a remote server via --server), and writes the response as CSV
or JSON with a reproducibility header. Exit codes: 0 success, 2 validation
error, 3 computational-cap error.
"""
from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import sys
from typing import Any

from . import __version__

log = logging.getLogger("majorate")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAP = 3

# fixed CSV columns per command; rows are emitted in this order
COLUMNS = {
    "entropy": ["H", "V", "D_rel", "V_rel"],
    "check": ["majorises"],
    "epsilon": ["epsilon", "direction", "metric", "witness"],
    "embed": ["embedded"],
    "rate-exact": ["n", "epsilon", "m_star", "rate", "rate_exact", "metric"],
    "rate-expand": ["R_inf", "nu", "coefficient", "regime", "direction",
                    "t_n", "R_n"],
    "resonance-scan": ["w", "nu", "gap"],
    "tail-scan": ["n", "x", "sum", "exponent_estimate", "predicted_exponent"],
    "rayleigh": ["mu", "Z", "alpha_cross", "method"],
    "convergence": ["n", "epsilon", "exact_rate", "expanded_rate", "residual",
                    "m_star"],
}

ENDPOINTS = {
    "entropy": "/entropy",
    "check": "/check",
    "epsilon": "/epsilon",
    "embed": "/embed",
    "rate-exact": "/rate/exact",
    "rate-expand": "/rate/expand",
    "resonance-scan": "/resonance-scan",
    "tail-scan": "/tail-scan",
    "rayleigh": "/rayleigh",
    "convergence": "/convergence",
}


def _parse_dist(text: str) -> dict:
    value = json.loads(text)
    if isinstance(value, list):
        return {"entries": value}
    if isinstance(value, dict) and "entries" in value:
        return value
    raise ValueError(f"distribution must be a list or {{'entries': [...]}}: {text!r}")


def _parse_grid(text: str) -> tuple[float, float, int]:
    lo, hi, steps = text.split(":")
    return float(lo), float(hi), int(steps)


def _gibbs_payload(args) -> dict | None:
    if getattr(args, "gibbs", None):
        return json.loads(args.gibbs)
    if getattr(args, "weights", None):
        return {"weights": json.loads(args.weights)}
    if getattr(args, "energies", None) is not None and getattr(args, "beta", None) is not None:
        return {"energies": json.loads(args.energies), "beta": args.beta}
    return None


def _seq_payload(args) -> dict:
    return {"c": args.c, "alpha": args.alpha}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="majorate",
        description="Interconversion rates for majorisation-based resource theories")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser):
        p.add_argument("--input", help="JSON file with the full request payload")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--server", help="remote service URL (default in-process)")
        p.add_argument("--seed", type=int, default=0,
                       help="recorded in output metadata for reproducibility")
        p.add_argument("--zeta", type=float, default=0.05,
                       help="slack for pile constructions; echoed in metadata")
        p.add_argument("--cap-classes", type=int, default=10_000_000)

    def add_dists(p: argparse.ArgumentParser, *names: str):
        for name in names:
            p.add_argument(f"--{name}", help=f"inline JSON for distribution {name}")

    def add_gibbs(p: argparse.ArgumentParser):
        p.add_argument("--gibbs", help='inline JSON: {"energies":[...],"beta":x}'
                                       ' or {"weights":[[num,den],...]}')
        p.add_argument("--weights", help="inline JSON rational weights [[num,den],...]")
        p.add_argument("--energies", help="inline JSON energy list")
        p.add_argument("--beta", type=float, help="inverse temperature")

    def add_seq(p: argparse.ArgumentParser):
        p.add_argument("--c", type=float, default=1.0, help="moderate-sequence scale")
        p.add_argument("--alpha", type=float, default=1.0 / 3.0,
                       help="moderate-sequence exponent in (0, 1/2)")

    p = sub.add_parser("entropy", help="entropy and entropy variance")
    add_common(p); add_dists(p, "p"); add_gibbs(p)

    def add_total(p: argparse.ArgumentParser):
        p.add_argument("--n", type=int, help="copies of a (total-state form)")
        p.add_argument("--m", type=int, help="copies of b (total-state form)")
        p.add_argument("--f", help="free state appended in the total-state form")

    p = sub.add_parser("check", help="exact majorisation test")
    add_common(p); add_dists(p, "a", "b"); add_total(p)

    p = sub.add_parser("epsilon", help="minimal smoothing error")
    add_common(p); add_dists(p, "a", "b"); add_total(p)
    p.add_argument("--direction", choices=["post", "pre"], default="post")
    p.add_argument("--metric", choices=["tvd", "fid"], default="tvd")

    p = sub.add_parser("embed", help="Gibbs embedding map")
    add_common(p); add_dists(p, "p"); add_gibbs(p)

    p = sub.add_parser("rate-exact", help="finite-n optimal rate")
    add_common(p); add_dists(p, "p", "q", "f"); add_gibbs(p)
    p.add_argument("--n", type=int, required=False)
    p.add_argument("--eps", type=float, required=False)
    p.add_argument("--direction", choices=["ent", "th"], default="ent")
    p.add_argument("--metric", choices=["tvd", "fid"], default="tvd")

    p = sub.add_parser("rate-expand", help="second-order rate expansion")
    add_common(p); add_dists(p, "p", "q"); add_gibbs(p); add_seq(p)
    p.add_argument("--n", type=int, required=False)
    p.add_argument("--direction", choices=["ent", "th"], default="ent")
    p.add_argument("--regime", choices=["direct", "converse"], default="direct")

    p = sub.add_parser("resonance-scan", help="irreversibility over a binary family")
    add_common(p); add_dists(p, "p"); add_gibbs(p)
    p.add_argument("--direction", choices=["ent", "th"], default="ent")
    p.add_argument("--grid", type=_parse_grid, default=(0.55, 0.95, 9),
                   help="w grid lo:hi:steps for q = [w, 1-w]")

    p = sub.add_parser("tail-scan", help="moderate-deviation tail exponents")
    add_common(p); add_dists(p, "p"); add_seq(p)
    p.add_argument("--n", type=int, required=False)
    p.add_argument("--kind", choices=["magnitude", "rank"], default="magnitude")
    p.add_argument("--grid", type=_parse_grid, default=(-1.0, 1.0, 5),
                   help="x grid lo:hi:steps")

    p = sub.add_parser("rayleigh", help="Rayleigh-normal CDF on a grid")
    add_common(p)
    p.add_argument("--nu", type=float, required=False)
    p.add_argument("--grid", "--mu-grid", dest="grid", type=_parse_grid,
                   default=(-10.0, 10.0, 21), help="mu grid lo:hi:steps")

    p = sub.add_parser("convergence", help="exact rates against the expansion")
    add_common(p); add_dists(p, "p", "q", "f"); add_gibbs(p); add_seq(p)
    p.add_argument("--n-grid", help="comma-separated n values, e.g. 4,8,12")
    p.add_argument("--direction", choices=["ent", "th"], default="ent")
    p.add_argument("--regime", choices=["direct", "converse"], default="direct")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def build_payload(args) -> dict:
    """Assemble the request body from flags; --input overrides everything."""
    if getattr(args, "input", None):
        with open(args.input) as fh:
            return json.load(fh)
    cmd = args.command
    gibbs = _gibbs_payload(args)

    def dist(name: str, required: bool = True) -> dict | None:
        raw = getattr(args, name, None)
        if raw is None:
            if required:
                raise ValueError(f"--{name} is required for {cmd}")
            return None
        return _parse_dist(raw)

    def need(name: str) -> Any:
        value = getattr(args, name.replace("-", "_"), None)
        if value is None:
            raise ValueError(f"--{name} is required for {cmd}")
        return value

    if cmd == "entropy":
        body: dict[str, Any] = {"dist": dist("p")}
        if gibbs:
            body["gibbs"] = gibbs
        return body
    def total_form() -> dict | None:
        n, m = getattr(args, "n", None), getattr(args, "m", None)
        if n is None and m is None:
            return None
        if n is None or m is None:
            raise ValueError("total-state form needs both --n and --m")
        form: dict[str, Any] = {"n": n, "m": m}
        f = dist("f", required=False)
        if f:
            form["f"] = f
        return form

    if cmd == "check":
        body = {"a": dist("a"), "b": dist("b")}
        total = total_form()
        if total:
            body["total"] = total
        return body
    if cmd == "epsilon":
        metric = "infidelity" if args.metric == "fid" else "tvd"
        body = {"a": dist("a"), "b": dist("b"),
                "direction": args.direction, "metric": metric}
        total = total_form()
        if total:
            body["total"] = total
        return body
    if cmd == "embed":
        if gibbs is None:
            raise ValueError("embed needs --gibbs or --weights")
        return {"dist": dist("p"), "gibbs": gibbs}
    if cmd == "rate-exact":
        body = {"p": dist("p"), "q": dist("q"), "n": need("n"),
                "eps": need("eps"), "direction": args.direction,
                "metric": args.metric, "cap_classes": args.cap_classes}
        f = dist("f", required=False)
        if f:
            body["f"] = f
        if gibbs:
            body["gibbs"] = gibbs
        return body
    if cmd == "rate-expand":
        body = {"p": dist("p"), "q": dist("q"), "n": need("n"),
                "direction": args.direction, "regime": args.regime,
                "seq": _seq_payload(args)}
        if gibbs:
            body["gibbs"] = gibbs
        return body
    if cmd == "resonance-scan":
        body = {"p": dist("p"), "direction": args.direction, "grid": args.grid}
        if gibbs:
            body["gibbs"] = gibbs
        return body
    if cmd == "tail-scan":
        return {"dist": dist("p"), "n": need("n"), "kind": args.kind,
                "x_grid": args.grid, "seq": _seq_payload(args),
                "cap_classes": args.cap_classes}
    if cmd == "rayleigh":
        return {"nu": need("nu"), "mu_grid": args.grid}
    if cmd == "convergence":
        n_grid = [int(v) for v in need("n-grid").split(",")]
        body = {"p": dist("p"), "q": dist("q"), "n_grid": n_grid,
                "direction": args.direction, "regime": args.regime,
                "seq": _seq_payload(args), "cap_classes": args.cap_classes}
        f = dist("f", required=False)
        if f:
            body["f"] = f
        if gibbs:
            body["gibbs"] = gibbs
        return body
    raise ValueError(f"unknown command {cmd}")


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        if value == 0.0:
            value = 0.0  # normalise -0.0
        return f"{value:.12g}"
    if isinstance(value, list):
        return ";".join(_fmt(v) for v in value)
    if value is None:
        return ""
    return str(value)


def _round_floats(obj: Any) -> Any:
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, list):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    return obj


def render(command: str, payload: dict, result: dict, fmt: str, seed: int,
           zeta: float = 0.05) -> str:
    meta = {
        "tool": "majorate",
        "version": __version__,
        "command": command,
        "seed": seed,
        "zeta": zeta,
        "prefix_slack": 1e-12,
        "params": _round_floats(payload),
    }
    timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    rows = result["rows"] if "rows" in result else [result]
    if fmt == "json":
        doc = {"meta": {**meta, "timestamp": timestamp},
               "result": _round_floats(result)}
        return json.dumps(doc, indent=2) + "\n"
    cols = COLUMNS[command]
    lines = [f"# {k}: {json.dumps(v) if isinstance(v, dict) else v}"
             for k, v in meta.items()]
    lines.append(f"# timestamp: {timestamp}")
    lines.append(",".join(cols))
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in cols))
    return "\n".join(lines) + "\n"


def post(server: str | None, path: str, payload: dict):
    """POST to a remote server, or drive the ASGI app in-process."""
    import httpx

    if server:
        with httpx.Client(base_url=server) as client:
            return client.post(path, json=payload)

    import asyncio

    from .service import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://majorate") as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("MAJORATE_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    try:
        payload = build_payload(args)
    except (ValueError, OSError) as exc:
        print(f"majorate: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    log.info("POST %s", ENDPOINTS[args.command])
    resp = post(args.server, ENDPOINTS[args.command], payload)
    if resp.status_code != 200:
        try:
            detail = resp.json()
        except json.JSONDecodeError:
            detail = {"error": "HTTPError", "message": resp.text}
        name = detail.get("error", "ValidationError")
        message = detail.get("message", detail.get("detail", resp.text))
        print(f"majorate: {name}: {message}", file=sys.stderr)
        return EXIT_CAP if resp.status_code == 413 else EXIT_VALIDATION

    text = render(args.command, payload, resp.json(), args.format, args.seed,
                  getattr(args, "zeta", 0.05))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
