"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 invariant violation, 4 numerical
failure. Errors are written to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, scenarios, serialize
from ._backend import BACKEND
from .errors import InvariantError, NumericalError
from .infotheory import (
    SECRET_EPS,
    JointDistribution,
    conditional_mutual_information,
    intrinsic_information,
    mutual_information,
)
from .measure import Povm, measure_bipartite, measure_tripartite, random_rank1_povm
from .qcore import DensityMatrix, PureTripartiteState, min_eig, partial_transpose, purify
from .witness import Witness, check_product_positivity

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_NUMERICAL = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    action: str | None = None
    options: dict = field(default_factory=dict)
    out: Path | None = None
    seed: int = 0


def _provenance(cfg: RunConfig, **extra) -> dict:
    return {"version": __version__, "backend": BACKEND, "command": cfg.command,
            "action": cfg.action, "seed": cfg.seed, **extra}


def _ppt_report(rho: DensityMatrix) -> dict:
    lam = min_eig(partial_transpose(rho, 1))[0] if len(rho.dims) == 2 else None
    return {"ppt_min_eigenvalue": lam, "ppt": None if lam is None else bool(lam >= -1e-10)}


def _load_state_file(path):
    """Density matrix plus the raw JSON (which may carry a UPB projector)."""
    raw = serialize.load(path)
    obj = serialize.decode(raw)
    if not isinstance(obj, (DensityMatrix, PureTripartiteState)):
        raise serialize.ParseError(f"{path}: expected a state")
    return obj, raw


def cmd_state(cfg: RunConfig) -> dict:
    o = cfg.options
    if cfg.action == "purify":
        rho, _ = _load_state_file(o["state"])
        if isinstance(rho, PureTripartiteState):
            return serialize.encode(rho)
        return serialize.encode(purify(rho))
    family = o["family"]
    extra = {}
    if family == "werner":
        rho = scenarios.werner_state(o["p"])
        params = {"p": o["p"]}
    elif family == "singlet":
        rho, params = scenarios.singlet_state(), {}
    elif family == "tiles":
        rho, proj = scenarios.tiles_state()
        params = {}
        extra["upb_projector"] = serialize.complex_array(proj)
    elif family == "separable":
        if not o.get("decomp"):
            raise serialize.ParseError("--decomp is required for the separable family")
        decomp = serialize.load_object(o["decomp"], scenarios.SeparableDecomposition)
        rho, params = scenarios.classically_correlated_state(decomp), {"decomp": str(o["decomp"])}
    else:
        raise serialize.ParseError(f"unknown state family {family!r}")
    out = serialize.encode(rho)
    out.update(extra)
    out.update(_ppt_report(rho))
    out["family"] = family
    out["params"] = params
    return out


def cmd_decomp(cfg: RunConfig) -> dict:
    o = cfg.options
    decomp = scenarios.SeparableDecomposition.random(o["dims"], o["terms"], cfg.seed)
    out = serialize.encode(decomp)
    out["provenance"] = _provenance(cfg)
    return out


def cmd_povm(cfg: RunConfig) -> dict:
    o = cfg.options
    kind = o["kind"]
    if kind == "computational":
        povm = Povm.computational(o["dim"])
    elif kind == "random":
        povm = random_rank1_povm(o["dim"], o["outcomes"] or o["dim"], cfg.seed)
    elif kind == "witness":
        wit = serialize.load_object(o["witness"], Witness)
        povm = wit.alice_povm() if o["side"] == "alice" else wit.bob_povm()
    else:
        raise serialize.ParseError(f"unknown POVM kind {kind!r}")
    return serialize.encode(povm)


def cmd_witness(cfg: RunConfig) -> dict:
    o = cfg.options
    rho, raw = _load_state_file(o["state"])
    if isinstance(rho, PureTripartiteState):
        rho = rho.reduced_ab()
    proj = serialize.parse_complex(raw["upb_projector"]) if "upb_projector" in raw else None
    wit, info = scenarios.entanglement_witness_for(rho, proj, o.get("epsilon"), o["restarts"], cfg.seed)
    out = serialize.encode(wit)
    out["construction"] = info
    out["expectation"] = wit.expectation(rho)
    out["reconstruction_residual"] = wit.reconstruction_residual()
    out["min_sampled_product_value"] = check_product_positivity(wit, 10_000, cfg.seed)
    return out


def cmd_map(cfg: RunConfig) -> dict:
    o = cfg.options
    state, _ = _load_state_file(o["state"])
    mx = serialize.load_object(o["alice"], Povm)
    my = serialize.load_object(o["bob"], Povm)
    if o.get("eve") is None:
        rho = state.reduced_ab() if isinstance(state, PureTripartiteState) else state
        return serialize.encode(measure_bipartite(rho, mx, my))
    mz = serialize.load_object(o["eve"], Povm)
    psi = state if isinstance(state, PureTripartiteState) else purify(state)
    return serialize.encode(measure_tripartite(psi, mx, my, mz))


def cmd_intrinsic(cfg: RunConfig) -> dict:
    o = cfg.options
    dist = serialize.load_object(o["dist"], JointDistribution)
    if dist.probs.ndim != 3:
        raise InvariantError("intrinsic information needs a tripartite distribution")
    res = intrinsic_information(dist, o.get("zbar"), o["restarts"], cfg.seed)
    out = serialize.encode(res)
    out["label"] = "best-found upper bound"
    out["conditional_mutual_information"] = conditional_mutual_information(dist)
    out["mutual_information"] = mutual_information(dist.marginal_xy())
    out["secrecy_detected"] = bool(res.value > o.get("secret_eps", SECRET_EPS))
    out["provenance"] = _provenance(cfg, restarts=o["restarts"], zbar_size=o.get("zbar"),
                                   tolerances={"secret_eps": o.get("secret_eps", SECRET_EPS)})
    return out


def cmd_attack(cfg: RunConfig) -> dict:
    decomp = serialize.load_object(cfg.options["decomp"], scenarios.SeparableDecomposition)
    psi, mz = scenarios.separable_attack(decomp)
    return {"type": "separable_attack", "state": serialize.encode(psi),
            "eve_povm": serialize.encode(mz)}


def cmd_verify(cfg: RunConfig) -> dict:
    o = cfg.options
    tols = {k: o[k] for k in ("secret_eps", "public_tol") if o.get(k) is not None}
    if cfg.action == "entangled":
        rho, raw = _load_state_file(o["state"])
        if isinstance(rho, PureTripartiteState):
            rho = rho.reduced_ab()
        proj = serialize.parse_complex(raw["upb_projector"]) if "upb_projector" in raw else None
        report = scenarios.verify_entangled_implies_secrecy(
            rho, o["eve_povms"], o["restarts"], cfg.seed, upb_projector=proj,
            zbar_size=o.get("zbar"), **tols)
    else:
        decomp = serialize.load_object(o["decomp"], scenarios.SeparableDecomposition)
        report = scenarios.verify_separable_implies_no_secrecy(
            decomp, o["pairs"], cfg.seed, o["restarts"], **tols)
    return report.to_dict()


COMMANDS = {
    "state": cmd_state,
    "decomp": cmd_decomp,
    "povm": cmd_povm,
    "witness": cmd_witness,
    "map": cmd_map,
    "intrinsic": cmd_intrinsic,
    "attack": cmd_attack,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        payload = COMMANDS[cfg.command](cfg)
        text = serialize.dumps(payload)
        if cfg.out is None:
            sys.stdout.write(text)
        else:
            Path(cfg.out).write_text(text)
        return EXIT_OK
    except serialize.ParseError as exc:
        return _fail(EXIT_PARSE, "parse_error", exc)
    except InvariantError as exc:
        return _fail(EXIT_INVARIANT, "invariant_violation", exc)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERICAL, "numerical_failure", exc)


def _fail(code: int, kind: str, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": {"kind": kind, "exit_code": code, "message": str(exc)}}) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=0, help="64-bit RNG seed (default 0)")

    p = argparse.ArgumentParser(prog="qsecret", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    state = sub.add_parser("state", help="build or transform states")
    ssub = state.add_subparsers(dest="action", required=True)
    make = ssub.add_parser("make", parents=[common], help="named state family")
    make.add_argument("family", choices=["werner", "singlet", "tiles", "separable"])
    make.add_argument("--p", type=float, default=0.8, help="Werner singlet weight")
    make.add_argument("--decomp", type=Path, help="decomposition file (separable family)")
    pur = ssub.add_parser("purify", parents=[common], help="canonical purification")
    pur.add_argument("--state", type=Path, required=True)

    dec = sub.add_parser("decomp", help="separable decompositions")
    dsub = dec.add_subparsers(dest="action", required=True)
    drand = dsub.add_parser("random", parents=[common])
    drand.add_argument("--dims", type=int, nargs=2, default=[2, 2])
    drand.add_argument("--terms", type=int, default=2)

    povm = sub.add_parser("povm", help="build measurements")
    psub = povm.add_subparsers(dest="action", required=True)
    pmake = psub.add_parser("make", parents=[common])
    pmake.add_argument("kind", choices=["computational", "random", "witness"])
    pmake.add_argument("--dim", type=int, default=2)
    pmake.add_argument("--outcomes", type=int, default=None)
    pmake.add_argument("--witness", type=Path)
    pmake.add_argument("--side", choices=["alice", "bob"], default="alice")

    wit = sub.add_parser("witness", help="entanglement witnesses")
    wsub = wit.add_subparsers(dest="action", required=True)
    wb = wsub.add_parser("build", parents=[common])
    wb.add_argument("--state", type=Path, required=True)
    wb.add_argument("--epsilon", type=float, default=None, help="UPB witness shift")
    wb.add_argument("--restarts", type=int, default=256, help="seesaw restarts")

    mp = sub.add_parser("map", parents=[common], help="measure a state")
    mp.add_argument("--state", type=Path, required=True)
    mp.add_argument("--alice", type=Path, required=True)
    mp.add_argument("--bob", type=Path, required=True)
    mp.add_argument("--eve", type=Path, default=None)

    ii = sub.add_parser("intrinsic", parents=[common], help="intrinsic information")
    ii.add_argument("--dist", type=Path, required=True)
    ii.add_argument("--zbar", type=int, default=None)
    ii.add_argument("--restarts", type=int, default=16)
    ii.add_argument("--secret-eps", type=float, default=SECRET_EPS)

    att = sub.add_parser("attack", help="Eve's attack constructions")
    asub = att.add_subparsers(dest="action", required=True)
    asep = asub.add_parser("separable", parents=[common])
    asep.add_argument("--decomp", type=Path, required=True)

    ver = sub.add_parser("verify", help="end-to-end scenario checks")
    vsub = ver.add_subparsers(dest="action", required=True)
    vent = vsub.add_parser("entangled", parents=[common])
    vent.add_argument("--state", type=Path, required=True)
    vent.add_argument("--eve-povms", type=int, default=20)
    vent.add_argument("--restarts", type=int, default=16)
    vent.add_argument("--zbar", type=int, default=None)
    vsep = vsub.add_parser("separable", parents=[common])
    vsep.add_argument("--decomp", type=Path, required=True)
    vsep.add_argument("--pairs", type=int, default=10)
    vsep.add_argument("--restarts", type=int, default=2)
    for v in (vent, vsep):
        v.add_argument("--secret-eps", type=float, default=None)
        v.add_argument("--public-tol", type=float, default=None)
    return p


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    action = args.pop("action", None)
    out = args.pop("out", None)
    seed = args.pop("seed", 0)
    return run(RunConfig(command, action, args, out, seed))


if __name__ == "__main__":
    sys.exit(main())
