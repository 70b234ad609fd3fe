"""Command-line client for the budget service.

Every subcommand builds one request and POSTs it to the service; by default
the service runs in-process over an ASGI transport, so no server needs to be
up. `--server URL` targets a running instance instead, and `wdp serve`
starts one.

Output is the service envelope. JSON prints floats at 10 significant digits,
tables round to 4 decimals, and CSVs use the 10-digit form, so identical
invocations (and seeds) yield byte-identical output. Exit codes: 2 for
validation failures, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import math
import os
import sys
from pathlib import Path

import httpx

from .accountant import load_state
from .simulation import CSV_HEADER

SEED_ENV = "WDP_SEED"


# ---------------------------------------------------------------------------
# transport


class ServiceClient:
    """POSTs to a remote server when given one, else to an in-process app."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> httpx.Response:
        async def go() -> httpx.Response:
            if self.server is None:
                from .service.app import create_app

                transport = httpx.ASGITransport(app=create_app())
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://service.internal", timeout=None
                ) as client:
                    return await client.post(path, json=payload)
            async with httpx.AsyncClient(base_url=self.server, timeout=300.0) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())


# ---------------------------------------------------------------------------
# output formatting


def _round10(obj):
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return obj
        return float(f"{obj:.10g}")
    if isinstance(obj, dict):
        return {k: _round10(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round10(v) for v in obj]
    return obj


def _fmt10(v) -> str:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return f"{v:.10g}"


def _fmt4(v) -> str:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return f"{v:.4f}"


def _rows_of(results):
    if isinstance(results, dict) and isinstance(results.get("rows"), list):
        return results["rows"]
    return None


def _print_csv(envelope: dict) -> None:
    results = envelope["results"]
    rows = _rows_of(results)
    if rows:
        keys = list(rows[0].keys())
        print(",".join(keys))
        for row in rows:
            print(",".join(_fmt10(row[k]) for k in keys))
    elif isinstance(results, dict):
        print("key,value")
        for k, v in results.items():
            if not isinstance(v, (list, dict)):
                print(f"{k},{_fmt10(v)}")
    for warning in envelope.get("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)


def _print_table(envelope: dict) -> None:
    results = envelope["results"]
    rows = _rows_of(results)
    print(f"command: {envelope['command']}")
    if rows:
        keys = list(rows[0].keys())
        widths = [
            max(len(k), max(len(_fmt4(row[k])) for row in rows)) for k in keys
        ]
        print("  ".join(k.ljust(w) for k, w in zip(keys, widths)))
        for row in rows:
            print("  ".join(_fmt4(row[k]).ljust(w) for k, w in zip(keys, widths)))
    elif isinstance(results, dict):
        for k, v in results.items():
            if isinstance(v, (list, dict)):
                continue
            print(f"  {k}: {_fmt4(v)}")
    for warning in envelope.get("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)


def _emit(resp: httpx.Response, fmt: str) -> int:
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail")
        except Exception:
            detail = resp.text
        print(f"error: {detail}", file=sys.stderr)
        return 2 if resp.status_code in (400, 422) else 3

    envelope = resp.json()
    if fmt == "json":
        print(json.dumps(_round10(envelope), indent=2, sort_keys=True))
    elif fmt == "csv":
        _print_csv(envelope)
    else:
        _print_table(envelope)
    return 0


# ---------------------------------------------------------------------------
# argument helpers


def _float_list(raw: str) -> list[float]:
    return [float(part) for part in raw.split(",") if part != ""]


def _dist_arg(raw: str) -> list:
    """Inline JSON pairs, or @path to read them from a file."""
    text = Path(raw[1:]).read_text() if raw.startswith("@") else raw
    return json.loads(text)


def _resolve_seed(seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env is not None else seed


def _scale_of(args, parser) -> float:
    given = [v for v in (args.scale, args.sigma, args.lam) if v is not None]
    if len(given) != 1:
        parser.error("provide exactly one of --scale / --sigma / --lambda")
    return given[0]


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_mech(args, parser) -> int:
    payload = {
        "kind": args.kind,
        "scale": _scale_of(args, parser),
        "sensitivity": args.sens,
        "framework": args.framework,
        "mu": args.mu,
        "alpha": args.alpha,
        "sweep_order": args.sweep_order,
    }
    return _emit(ServiceClient(args.server).post("/mechanism", payload), args.format)


def _cmd_convert(args, parser) -> int:
    payload = {
        "source": args.source,
        "target": args.target,
        "epsilon": args.eps,
        "sensitivity": args.sens,
        "mu": args.mu,
        "alpha": args.alpha,
        "round_trip": args.round_trip,
    }
    if args.lipschitz is not None:
        payload["lipschitz"] = args.lipschitz
    return _emit(ServiceClient(args.server).post("/convert", payload), args.format)


def _cmd_compose(args, parser) -> int:
    client = ServiceClient(args.server)
    mu = args.mu[0] if len(args.mu) == 1 else args.mu
    if args.group is not None:
        payload = {"epsilon": args.group, "mu": args.mu[0], "k": args.k}
        return _emit(client.post("/compose/group", payload), args.format)
    if args.advanced_delta:
        if args.epsilon is None:
            parser.error("--advanced-delta requires --epsilon")
        payload = {
            "losses": args.losses or [],
            "epsilon": args.epsilon,
            "beta": args.beta,
            "mu": args.mu[0],
        }
        return _emit(client.post("/compose/advanced-delta", payload), args.format)
    if args.sequential is not None:
        payload = {"mode": "sequential", "epsilons": args.sequential, "mu": mu}
    elif args.parallel is not None:
        payload = {"mode": "parallel", "epsilons": args.parallel, "mu": mu}
    else:
        parser.error("choose one of --sequential/--parallel/--group/--advanced-delta")
    return _emit(client.post("/compose", payload), args.format)


def _cmd_account(args, parser) -> int:
    client = ServiceClient(args.server)
    if args.step_loss:
        if args.sigma is None:
            parser.error("--step-loss requires --sigma")
        payload = {
            "q": args.q,
            "sigma": args.sigma,
            "mu": args.mu if args.mu is not None else 1.0,
            "grad_dim": args.grad_dim,
            "d": args.d,
        }
        return _emit(client.post("/accountant/step-loss", payload), args.format)

    losses = list(args.losses or [])
    mu, beta, delta = args.mu, args.beta, args.delta
    if args.losses_file:
        state, knobs = load_state(Path(args.losses_file).read_text())
        losses = list(state.losses) + losses
        # explicit flags win over checkpointed knobs
        mu = mu if mu is not None else knobs.get("mu")
        beta = beta if beta is not None else knobs.get("beta")
        delta = delta if delta is not None else knobs.get("delta")
    mu = 1.0 if mu is None else mu
    beta = 1.0 if beta is None else beta

    if args.epsilon is not None:
        payload = {"losses": losses, "beta": beta, "epsilon": args.epsilon, "mu": mu}
        rc = _emit(client.post("/accountant/delta", payload), args.format)
    else:
        if delta is None:
            parser.error("provide --delta (for epsilon) or --epsilon (for delta)")
        payload = {"losses": losses, "beta": beta, "delta": delta, "mu": mu}
        rc = _emit(client.post("/accountant/epsilon", payload), args.format)

    if rc == 0 and args.save_state:
        doc = {
            "mu": mu,
            "beta": beta,
            "delta": delta if delta is not None else 1e-10,
            "losses": losses,
            "steps": len(losses),
        }
        Path(args.save_state).write_text(
            json.dumps(_round10(doc), indent=2, sort_keys=True) + "\n"
        )
    return rc


def _cmd_ot(args, parser) -> int:
    client = ServiceClient(args.server)
    if args.ot_command == "distance":
        payload = {"p": _dist_arg(args.p), "q": _dist_arg(args.q), "mu": args.mu}
        return _emit(client.post("/ot/distance", payload), args.format)
    if args.ot_command == "dual":
        payload = {"p": _dist_arg(args.p), "q": _dist_arg(args.q)}
        return _emit(client.post("/ot/dual", payload), args.format)
    if args.ot_command == "samples":
        payload = {"x": args.x, "y": args.y, "mu": args.mu}
        return _emit(client.post("/ot/samples", payload), args.format)
    if args.ot_command == "pushforward":
        payload = {
            "p": _dist_arg(args.p),
            "q": _dist_arg(args.q),
            "map": args.map,
            "mu": args.mu,
        }
        return _emit(client.post("/ot/pushforward", payload), args.format)
    # audit
    payload = {
        "kind": args.kind,
        "scale": _scale_of(args, parser),
        "sensitivity": args.sens,
        "mu": args.mu,
        "samples": args.samples,
        "seed": _resolve_seed(args.seed),
    }
    return _emit(client.post("/ot/audit", payload), args.format)


def _cmd_simulate(args, parser) -> int:
    payload = {
        "seed": _resolve_seed(args.seed),
        "steps": args.steps,
        "examples": args.examples,
        "shape": args.shape,
        "sigma": args.sigma,
        "clip_quantile": args.clip_quantile,
        "clip": args.clip,
        "q": args.q,
        "mu": args.mu,
        "beta": args.beta,
        "delta": args.delta,
        "policy": args.policy,
        "sample_pairs": args.sample_pairs,
    }
    resp = ServiceClient(args.server).post("/simulate", payload)
    rc = _emit(resp, args.format)
    if rc == 0 and args.out:
        envelope = resp.json()
        rows = envelope["results"]["rows"]
        lines = [CSV_HEADER]
        for row in rows:
            lines.append(
                f"{row['step']},{_fmt10(row['epsilon_wdp'])},"
                f"{_fmt10(row['epsilon_rdp_baseline'])}"
            )
        csv_path = Path(args.out)
        csv_path.write_text("\n".join(lines) + "\n")
        meta_path = csv_path.with_suffix(".meta.json")
        meta_path.write_text(
            json.dumps(envelope["results"]["metadata"], indent=2, sort_keys=True) + "\n"
        )
    return rc


def _cmd_serve(args, parser) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("json", "csv", "table"), default="json"
    )
    common.add_argument(
        "--server", default=None, help="service URL; default runs in-process"
    )

    scales = argparse.ArgumentParser(add_help=False)
    scales.add_argument("--scale", type=float, default=None)
    scales.add_argument("--sigma", type=float, default=None, help="Gaussian scale")
    scales.add_argument(
        "--lambda", dest="lam", type=float, default=None, help="Laplace scale"
    )

    parser = argparse.ArgumentParser(
        prog="wdp", description="Wasserstein privacy-budget toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mech", parents=[common, scales], help="mechanism budgets")
    p.add_argument("--kind", choices=("laplace", "gaussian"), required=True)
    p.add_argument("--sens", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--framework", choices=("wdp", "rdp", "dp"), default="wdp")
    p.add_argument("--sweep-order", default=None, metavar="LO:HI:STEP")
    p.set_defaults(handler=_cmd_mech)

    p = sub.add_parser("convert", parents=[common], help="budget conversions")
    p.add_argument("--from", dest="source", choices=("dp", "rdp", "wdp"), required=True)
    p.add_argument("--to", dest="target", choices=("wdp", "rdp", "dp", "zcdp"), default="wdp")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--sens", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lipschitz", type=float, default=None)
    p.add_argument("--round-trip", action="store_true")
    p.set_defaults(handler=_cmd_convert)

    p = sub.add_parser("compose", parents=[common], help="budget composition")
    p.add_argument("--sequential", type=_float_list, default=None, metavar="E1,E2,...")
    p.add_argument("--parallel", type=_float_list, default=None, metavar="E1,E2,...")
    p.add_argument("--group", type=float, default=None, metavar="EPS")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--advanced-delta", action="store_true")
    p.add_argument("--losses", type=_float_list, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mu", type=_float_list, default=[1.0], metavar="MU[,MU2,...]")
    p.set_defaults(handler=_cmd_compose)

    p = sub.add_parser("account", parents=[common], help="accountant queries")
    p.add_argument("--losses", type=_float_list, default=None)
    p.add_argument("--losses-file", default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--step-loss", action="store_true")
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--d", type=float, default=0.0)
    p.add_argument("--grad-dim", type=int, default=1)
    p.add_argument("--save-state", default=None, metavar="PATH")
    p.set_defaults(handler=_cmd_account)

    p = sub.add_parser("ot", parents=[common], help="optimal-transport oracle")
    otsub = p.add_subparsers(dest="ot_command", required=True)
    dist = otsub.add_parser("distance", parents=[common])
    dist.add_argument("--p", required=True, help='pairs JSON "[[x,w],...]" or @file')
    dist.add_argument("--q", required=True)
    dist.add_argument("--mu", type=float, default=1.0)
    dual = otsub.add_parser("dual", parents=[common])
    dual.add_argument("--p", required=True)
    dual.add_argument("--q", required=True)
    samp = otsub.add_parser("samples", parents=[common])
    samp.add_argument("--x", type=_float_list, required=True)
    samp.add_argument("--y", type=_float_list, required=True)
    samp.add_argument("--mu", type=float, default=1.0)
    push = otsub.add_parser("pushforward", parents=[common])
    push.add_argument("--p", required=True)
    push.add_argument("--q", required=True)
    push.add_argument("--map", default="identity")
    push.add_argument("--mu", type=float, default=1.0)
    audit = otsub.add_parser("audit", parents=[common, scales])
    audit.add_argument("--kind", choices=("laplace", "gaussian"), default="gaussian")
    audit.add_argument("--sens", type=float, default=1.0)
    audit.add_argument("--mu", type=float, default=1.0)
    audit.add_argument("--samples", type=int, default=100_000)
    audit.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_ot)

    p = sub.add_parser("simulate", parents=[common], help="synthetic-gradient run")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--examples", type=int, default=1000)
    p.add_argument("--shape", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--clip-quantile", type=float, default=None)
    p.add_argument("--clip", action="store_true")
    p.add_argument("--q", type=float, default=0.01)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-10)
    p.add_argument("--policy", default="min")
    p.add_argument("--sample-pairs", type=int, default=None)
    p.add_argument("--out", default=None, metavar="CSV_PATH")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
