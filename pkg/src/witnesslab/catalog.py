"""Resolve CLI names (and operator files) to operators, witnesses and states.

Observables: any witness or state name, ``ew2:ctilde`` (compressed two-qubit
observable), ``choi3:ctilde`` (p-SPA of the Choi witness), ``qghzlin``,
``maxmix:<D>`` or ``maxmix:<d1>,<d2>,...``.

Witnesses: ``ew2q:plus``, ``ew2q:minus``, ``choi3``, ``choi3:mirror``.

States: ``bell:<phi+|phi-|psi+|psi->``, ``iso:alpha=<t>``, ``iso:beta=<t>``,
``ghz3``, ``dicke3``, ``simplex:<c1>,<c2>,<c3>``, ``maxent:<d>``, ``maxmix:...``.

A name ending in ``.json`` is read as an operator file.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .gme import q_ghz_lin_operator
from .operators import HermitianOperator, load_operator, maximally_mixed
from .states import (
    DensityMatrix,
    SimplexPoint,
    bell,
    dicke3,
    ghz3,
    isotropic,
    max_entangled,
    simplex_state,
)
from .witnesses import BUILTINS, Witness, builtin

WITNESS_NAMES = ("ew2q:plus", "ew2q:minus", "choi3", "choi3:mirror")


def ew2_compressed() -> HermitianOperator:
    """The compressed two-qubit observable with window [3/20, 7/20]."""
    m = np.array([[2, 0, 0, -2], [0, 3, 0, 0], [0, 0, 3, 0], [-2, 0, 0, 2]]) / 10
    return HermitianOperator(m, (2, 2))


def choi3_compressed() -> HermitianOperator:
    return 2 / 5 * builtin("choi3") + 1 / 15 * HermitianOperator(np.eye(9), (3, 3))


def _parse_maxmix(arg: str) -> HermitianOperator:
    try:
        parts = [int(p) for p in arg.split(",")]
    except ValueError as exc:
        raise InputError(f"bad maxmix spec {arg!r}") from exc
    if len(parts) > 1:
        return maximally_mixed(parts)
    D = parts[0]
    d = int(round(np.sqrt(D)))
    if d * d == D and d >= 2:
        return maximally_mixed((d, d))
    k = int(round(np.log2(D))) if D > 1 else 0
    if 2**k == D and k >= 1:
        return maximally_mixed((2,) * k)
    return maximally_mixed((D,))


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise InputError(f"bad number {text!r} in {what}") from exc


def resolve_state(name: str) -> DensityMatrix:
    if name.endswith(".json"):
        return DensityMatrix.from_operator(load_operator(name))
    head, _, arg = name.partition(":")
    if head == "bell":
        return bell(arg).density()
    if head == "iso":
        family, _, value = arg.partition("=")
        return isotropic(family, _parse_float(value, name))
    if name == "ghz3":
        return ghz3().density()
    if name == "dicke3":
        return dicke3().density()
    if head == "simplex":
        c = [_parse_float(x, name) for x in arg.split(",")]
        if len(c) != 3:
            raise InputError("simplex state needs three coordinates")
        return DensityMatrix.from_operator(simplex_state(SimplexPoint(*c)))
    if head == "maxent":
        return max_entangled(int(_parse_float(arg, name))).density()
    if head == "maxmix":
        return DensityMatrix.from_operator(_parse_maxmix(arg))
    raise InputError(f"unknown state {name!r}")


def resolve_observable(name: str) -> HermitianOperator:
    if name.endswith(".json"):
        return load_operator(name)
    if name == "ew2:ctilde":
        return ew2_compressed()
    if name == "choi3:ctilde":
        return choi3_compressed()
    if name == "qghzlin":
        return q_ghz_lin_operator()
    if name.replace(":", "_") in BUILTINS:
        return builtin(name)
    if name.startswith("maxmix:"):
        return _parse_maxmix(name.partition(":")[2])
    try:
        return resolve_state(name)
    except InputError:
        raise InputError(f"unknown observable {name!r}") from None


def resolve_witness(name: str) -> Witness:
    if name.replace(":", "_") in BUILTINS:
        return builtin(name)
    return Witness.from_operator(resolve_observable(name))
