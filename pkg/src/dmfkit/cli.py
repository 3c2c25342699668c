"""Command-line interface: verify / minimize / zscan / fci2.

Exit codes: 0 success, 1 numerical or verification failure (and I/O
errors), 2 usage errors.  JSON goes to stdout for single results, CSV to
a file for scans.  ``DMFKIT_SEED`` provides the seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time


from . import __version__
from .functionals import FunctionalKind
from .integrals import BasisSpec, IntegralSet, build_even_tempered, load_interchange
from .optimize import MinimizeOptions, minimize, zscan
from .verify import fci2_energy, fdl_suite, lemma_suite, psd_suite, sandwich_suite

DEFAULT_BASIS = "even:10,0.05,2.2"
_PSD_SIZES = (4, 8, 12)


def _default_seed() -> int:
    try:
        return int(os.environ.get("DMFKIT_SEED", "0"))
    except ValueError:
        return 0


def _parse_basis(text: str, Z: float, q: int) -> BasisSpec:
    if not text.startswith("even:"):
        raise ValueError(f"unknown basis spec {text!r}; expected even:count,alpha0,beta")
    parts = text[len("even:"):].split(",")
    if len(parts) != 3:
        raise ValueError(f"basis spec {text!r} needs count,alpha0,beta")
    return BasisSpec(count=int(parts[0]), alpha0=float(parts[1]), beta=float(parts[2]), Z=Z, q=q)


def _load_set(args, Z: float, q: int) -> IntegralSet:
    if getattr(args, "integrals", None):
        return load_interchange(args.integrals)
    return build_even_tempered(_parse_basis(args.basis, Z, q))


def builtin_set(n: int, Z: float = 2.0, q: int = 2) -> IntegralSet:
    """Reference even-tempered set used by the verification suites."""
    return build_even_tempered(BasisSpec(count=n, alpha0=0.05, beta=2.2, Z=Z, q=q))


def _opts_from(args) -> MinimizeOptions:
    kw = {"seed": args.seed}
    if getattr(args, "tol", None) is not None:
        kw["tol_energy"] = args.tol
    if getattr(args, "starts", None) is not None:
        kw["starts"] = args.starts
    return MinimizeOptions(**kw)


def cmd_verify(args) -> int:
    reports = []
    if args.suite in ("lemma", "all"):
        reports.append(lemma_suite(trials=args.trials or 1_000_000, seed=args.seed))
    if args.suite in ("fdl", "all"):
        reports.append(fdl_suite(seed=args.seed))
    if args.suite in ("psd", "all"):
        if args.integrals:
            sets = [load_interchange(args.integrals)]
        else:
            sets = [builtin_set(n) for n in _PSD_SIZES]
        reports.append(psd_suite(sets))
    if args.suite in ("sandwich", "all"):
        if args.integrals:
            iset = load_interchange(args.integrals)
        else:
            iset = builtin_set(8)
        trials = args.trials or 1000
        reports.append(sandwich_suite(iset, N=float(iset.n), trials=trials, seed=args.seed))
    for rep in reports:
        print(rep.to_json())
    return 0 if all(r.passed for r in reports) else 1


def _minimize_payload(args, iset: IntegralSet, kind: FunctionalKind):
    res = minimize(iset, float(args.N), kind, _opts_from(args))
    return res, {
        "command": "minimize",
        "functional": kind.value,
        "Z": iset.Z,
        "N": args.N,
        "q": iset.q,
        "provenance": iset.provenance,
        "seed": args.seed,
        "energy": res.energy.as_dict(),
        "occupations": [float(x) for x in res.occupations],
        "trace": iset.q * res.gamma.trace(),
        "iterations": res.iterations,
        "converged": res.converged,
        "active_trace": res.active_trace,
        "start_energies_ha": [float(e) for e in res.start_energies],
    }


def cmd_minimize(args) -> int:
    iset = _load_set(args, float(args.Z), args.q)
    t0 = time.perf_counter()
    try:
        res, payload = _minimize_payload(args, iset, FunctionalKind(args.functional))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(payload, indent=2))
    if args.json:
        record = {
            "argv": sys.argv[1:],
            "options": dataclasses.asdict(_opts_from(args)),
            "provenance": iset.provenance,
            "result": payload,
            "wall_time_s": time.perf_counter() - t0,
            "version": __version__,
            "seed": args.seed,
        }
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=2)
            fh.write("\n")
    return 0 if res.converged else 1


def _parse_zrange(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    return list(range(lo, hi + 1))


def cmd_zscan(args) -> int:
    z_values = _parse_zrange(args.z)
    if not z_values or z_values[0] < 1:
        print(f"error: empty or invalid Z range {args.z!r}", file=sys.stderr)
        return 2
    kinds = [k for k in FunctionalKind] if args.functional == "all" else [FunctionalKind(args.functional)]
    basis = _parse_basis(args.basis, Z=0.0, q=args.q)
    if args.q == 2 and any(z % 2 for z in z_values):
        print("error: q=2 zscan requires even Z values", file=sys.stderr)
        return 2
    rows = zscan(kinds, z_values, basis, _opts_from(args))
    by_z = {}
    for row in rows:
        by_z.setdefault(row.Z, {})[row.kind] = row.energy_ha
    lines = ["Z,kind,energy_ha,converged,trace,iterations,ordering_ok"]
    all_ok = True
    for row in rows:
        e = by_z[row.Z]
        ordered = True
        if "mueller" in e and "ca" in e:
            ordered &= e["mueller"] <= e["ca"] + 1e-8
        if "ca" in e and "hf" in e:
            ordered &= e["ca"] <= e["hf"] + 1e-8
        if "mueller" in e and "hf" in e:
            ordered &= e["mueller"] <= e["hf"] + 1e-8
        all_ok &= ordered
        lines.append(",".join(row.as_csv_fields() + ["true" if ordered else "false"]))
    try:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        print(f"error: cannot write {args.csv!r}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"command": "zscan", "rows": len(rows), "csv": args.csv,
                      "ordering_ok": bool(all_ok)}))
    return 0 if all_ok else 1


def cmd_fci2(args) -> int:
    iset = _load_set(args, float(args.Z), q=2)
    if iset.q != 2:
        print("error: fci2 requires q=2 integrals", file=sys.stderr)
        return 2
    if iset.n > 20:
        print(f"error: pair space capped at n=20, got n={iset.n}", file=sys.stderr)
        return 2
    e_fci = fci2_energy(iset)
    energies = {"fci_ha": e_fci}
    converged = {}
    args.N = 2
    for kind in FunctionalKind:
        res, _payload = _minimize_payload(args, iset, kind)
        energies[f"{kind.value}_ha"] = res.energy.total
        converged[kind.value] = res.converged
    payload = {
        "command": "fci2",
        "Z": iset.Z,
        "n": iset.n,
        "seed": args.seed,
        "energies_ha": energies,
        "gaps_ha": {
            "hf_minus_fci_ha": energies["hf_ha"] - e_fci,
            "mueller_minus_fci_ha": energies["mueller_ha"] - e_fci,
        },
        "converged": converged,
    }
    print(json.dumps(payload, indent=2))
    return 0 if all(converged.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmfkit", description=__doc__)
    p.add_argument("--version", action="version", version=f"dmfkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run certification suites")
    v.add_argument("--suite", choices=["lemma", "fdl", "sandwich", "psd", "all"], default="all")
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--integrals", default=None, help="interchange file for psd/sandwich")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("minimize", help="minimize one functional")
    m.add_argument("--functional", choices=["hf", "mueller", "ca"], required=True)
    m.add_argument("--Z", type=float, required=True)
    m.add_argument("--N", type=float, required=True)
    m.add_argument("--q", type=int, choices=[1, 2], default=1)
    m.add_argument("--basis", default=DEFAULT_BASIS)
    m.add_argument("--integrals", default=None)
    m.add_argument("--tol", type=float, default=None)
    m.add_argument("--starts", type=int, default=None)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--json", default=None, help="persist a run record here")
    m.set_defaults(func=cmd_minimize)

    z = sub.add_parser("zscan", help="neutral-atom scan, CSV output")
    z.add_argument("--z", required=True, help="range A..B (inclusive)")
    z.add_argument("--functional", choices=["hf", "mueller", "ca", "all"], default="all")
    z.add_argument("--csv", required=True)
    z.add_argument("--basis", default=DEFAULT_BASIS)
    z.add_argument("--q", type=int, choices=[1, 2], default=1)
    z.add_argument("--seed", type=int, default=None)
    z.add_argument("--starts", type=int, default=None)
    z.set_defaults(func=cmd_zscan)

    f = sub.add_parser("fci2", help="two-electron FCI against the functionals")
    f.add_argument("--Z", type=float, required=True)
    f.add_argument("--basis", default=DEFAULT_BASIS)
    f.add_argument("--integrals", default=None)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--starts", type=int, default=None)
    f.set_defaults(func=cmd_fci2)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1


if __name__ == "__main__":
    sys.exit(main())
