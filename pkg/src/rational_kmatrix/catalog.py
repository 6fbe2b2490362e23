"""Resolution of textual addresses for algebras, R-matrices and K-families.

K-families::

    diag:sl(n):p,q:xi=VALUE
    twist-const:sl(n):sym|skew
    nilpotent:sl(n):k=K
    custom:file=PATH[:twisted]

R-matrices::

    yang:sl(n)
    yang-crossed:sl(n):auto-gamma
"""

import re
from pathlib import Path

import numpy as np

from .errors import AddressError, KMatrixError
from .formats import parse_complex, read_series
from .kmatrix import constant_twisted_k, custom_k, diagonal_k, nilpotent_k, skew_form
from .rmatrix import crossed_yang, yang_r

_SL = r"sl\((\d+)\)"


def parse_algebra(text):
    m = re.fullmatch(_SL, text.strip())
    if not m:
        raise AddressError(f"unknown algebra {text!r}; expected sl(n)")
    return int(m.group(1))


def _build(factory, *args):
    try:
        return factory(*args)
    except KMatrixError as exc:
        raise AddressError(str(exc)) from exc
    except ValueError as exc:
        raise AddressError(str(exc)) from exc


def resolve_k(address):
    a = address.strip()
    if m := re.fullmatch(rf"diag:{_SL}:(\d+),(\d+):xi=(.+)", a):
        n, p, q = (int(m.group(i)) for i in (1, 2, 3))
        try:
            xi = parse_complex(m.group(4))
        except ValueError as exc:
            raise AddressError(f"bad xi in {address!r}") from exc
        return _build(diagonal_k, n, p, q, xi)
    if m := re.fullmatch(rf"twist-const:{_SL}:(sym|skew)", a):
        n = int(m.group(1))
        kappa = np.eye(n) if m.group(2) == "sym" else _build(skew_form, n)
        return _build(constant_twisted_k, n, kappa)
    if m := re.fullmatch(rf"nilpotent:{_SL}:k=(\d+)", a):
        return _build(nilpotent_k, int(m.group(1)), int(m.group(2)))
    if m := re.fullmatch(r"custom:file=([^:]+)(:twisted)?", a):
        path = Path(m.group(1))
        try:
            series = read_series(path.read_text())
        except (OSError, ValueError) as exc:
            raise AddressError(f"cannot read series file {path}: {exc}") from exc
        return _build(custom_k, series, bool(m.group(2)), f"custom:{path.name}")
    raise AddressError(f"unresolvable K-family address {address!r}")


def resolve_r(address):
    a = address.strip()
    if m := re.fullmatch(rf"yang:{_SL}", a):
        return _build(yang_r, int(m.group(1)))
    if m := re.fullmatch(rf"yang-crossed:{_SL}:auto-gamma", a):
        return _build(crossed_yang, int(m.group(1)))
    raise AddressError(f"unresolvable R-matrix address {address!r}")
