"""Plain-text exchange formats for matrices, series, structure constants and
reports."""

import json

import numpy as np

from .errors import ShapeMismatchError
from .series import MatrixSeries


def format_complex(z):
    z = complex(z)
    im = repr(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{z.real!r}{sign}{im}j"


def parse_complex(token):
    """Parse "re+imj"; a trailing "i" is accepted for the imaginary unit."""
    t = token.strip()
    if t.endswith("i"):
        t = t[:-1] + "j"
    return complex(t)


def _data_lines(text):
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    return lines


def write_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    rows = [" ".join(format_complex(z) for z in row) for row in M]
    return "\n".join([f"{M.shape[0]} {M.shape[1]}"] + rows) + "\n"


def _parse_rows(lines, rows, cols):
    if len(lines) < rows:
        raise ShapeMismatchError(f"expected {rows} rows, found {len(lines)}")
    M = np.zeros((rows, cols), dtype=complex)
    for i in range(rows):
        tokens = lines[i].split()
        if len(tokens) != cols:
            raise ShapeMismatchError(f"row {i} has {len(tokens)} entries, expected {cols}")
        M[i] = [parse_complex(t) for t in tokens]
    return M


def read_matrix(text):
    lines = _data_lines(text)
    rows, cols = (int(t) for t in lines[0].split())
    return _parse_rows(lines[1:], rows, cols)


def write_series(s):
    body = []
    for c in s.coeffs:
        body.extend(" ".join(format_complex(z) for z in row) for row in c)
    r, c = s.shape
    return "\n".join([f"{r} {c} {s.order}"] + body) + "\n"


def read_series(text):
    lines = _data_lines(text)
    header = lines[0].split()
    if len(header) != 3:
        raise ShapeMismatchError("series header must read 'd_rows d_cols order'")
    r, c, order = (int(t) for t in header)
    body = lines[1:]
    if len(body) != r * (order + 1):
        raise ShapeMismatchError(f"expected {r * (order + 1)} coefficient rows, found {len(body)}")
    coeffs = [_parse_rows(body[k * r : (k + 1) * r], r, c) for k in range(order + 1)]
    return MatrixSeries(np.array(coeffs))


def write_algebra(alg):
    return "".join(f"{a} {b} {c} {format_complex(v)}\n" for a, b, c, v in alg.structure_triplets())


def read_structure_constants(text, dim):
    f = np.zeros((dim, dim, dim), dtype=complex)
    for line in _data_lines(text):
        a, b, c, v = line.split()
        f[int(a), int(b), int(c)] = parse_complex(v)
    return f


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return float(v.real) if v.imag == 0 else format_complex(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    return v


def report_document(command, subject, fields, checks):
    """Structured report: one object per check."""
    return {
        "command": command,
        "subject": subject,
        "fields": _json_value(fields),
        "checks": [
            {"name": c.name, "residual": float(c.residual), "tolerance": float(c.tolerance), "pass": c.passed}
            for c in checks
        ],
    }


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    return str(v)


def render_text(doc):
    """Flat key = value rendering of a report document."""
    lines = [f"command = {doc['command']}", f"subject = {doc['subject']}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in doc["fields"].items()]
    for c in doc["checks"]:
        verdict = "PASS" if c["pass"] else "FAIL"
        lines.append(f"check.{c['name']} = {c['residual']:.3e} (tol {c['tolerance']:.0e}) {verdict}")
    all_pass = all(c["pass"] for c in doc["checks"])
    lines.append(f"result = {'PASS' if all_pass else 'FAIL'}")
    return "\n".join(lines) + "\n"


def dump_json(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def load_json(text):
    return json.loads(text)
