"""Run configuration: one INI-style file drives every CLI subcommand.

Grammar (configparser dialect): sections in brackets, key = value pairs,
# comments. [model] d and a [zeta] geometry are required; everything else
has a default. File references inside the config resolve relative to the
config file's own directory. See the README for the full key table.
"""

import hashlib
import os
from configparser import ConfigParser
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .potentials import GeometricPotential, Potential, load_potential_csv
from .quotients import (FiniteQuotient, FreeAbelianQuotient,
                        FreeKillQuotient)

_ALLOWED = {
    "model": {"d", "seed"},
    "quotient": {"type", "file", "images", "rank", "vectors", "killed"},
    "zeta": {"constant", "ratios", "file"},
    "psi": {"constant", "letters", "file"},
    "grid": {"beta_min", "beta_max", "beta_step", "alpha_count"},
    "tolerances": {"eigen", "bisection", "sigma_factor"},
    "budgets": {"n_max", "max_states", "gibbs_len", "horizon",
                "return_length"},
    "output": {"directory"},
}


@dataclass
class RunConfig:
    d: int
    zeta: Potential
    psi: Potential
    quotient: object            # None for the full shift
    betas: np.ndarray
    alpha_count: int
    tol_eigen: float
    tol_bisection: float
    sigma_factor: float
    n_max: int
    max_states: int
    gibbs_len: int
    horizon: int
    return_length: int
    out_dir: str
    seed: int
    config_hash: str
    overrides: dict = field(default_factory=dict)

    def describe_quotient(self):
        return "none" if self.quotient is None else self.quotient.describe()


def _floats(text):
    try:
        return [float(x) for x in text.replace(";", ",").split(",")
                if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad numeric list {text!r}: {exc}")


def _ints(text):
    vals = _floats(text)
    out = [int(v) for v in vals]
    if any(v != w for v, w in zip(vals, out)):
        raise ValidationError(f"expected integers, got {text!r}")
    return out


def _vectors(text):
    """semicolon-separated comma vectors: '1,0; 0,1'"""
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            out.append(tuple(_ints(chunk)))
    return out


def _build_zeta(cp, d, base_dir):
    if not cp.has_section("zeta"):
        raise ValidationError("missing required [zeta] section")
    sec = cp["zeta"]
    given = [k for k in ("constant", "ratios", "file") if k in sec]
    if len(given) != 1:
        raise ValidationError(
            f"[zeta] needs exactly one of constant/ratios/file, got {given}")
    if "constant" in sec:
        v = float(sec["constant"])
        if v >= 0:
            raise ValidationError(f"[zeta] constant must be < 0, got {v}")
        return GeometricPotential.constant(d, v)
    if "ratios" in sec:
        ratios = _floats(sec["ratios"])
        if len(ratios) == 1:
            ratios = ratios * (2 * d)
        if len(ratios) == d:
            # one ratio per generator, shared with the inverse letter
            ratios = [r for r in ratios for _ in (0, 1)]
        return GeometricPotential.from_ratios(d, ratios)
    return load_potential_csv(d, os.path.join(base_dir, sec["file"]),
                              geometric=True)


def _build_psi(cp, d, base_dir):
    if not cp.has_section("psi"):
        return Potential.constant(d, 0.0)
    sec = cp["psi"]
    given = [k for k in ("constant", "letters", "file") if k in sec]
    if len(given) != 1:
        raise ValidationError(
            f"[psi] needs exactly one of constant/letters/file, got {given}")
    if "constant" in sec:
        return Potential.constant(d, float(sec["constant"]))
    if "letters" in sec:
        vals = _floats(sec["letters"])
        if len(vals) == d:
            vals = [v for v in vals for _ in (0, 1)]
        return Potential.from_letter_values(d, vals)
    return load_potential_csv(d, os.path.join(base_dir, sec["file"]))


def _build_quotient(cp, d, base_dir):
    if not cp.has_section("quotient"):
        return None
    sec = cp["quotient"]
    qtype = sec.get("type", "none").strip().lower()
    if qtype == "none":
        return None
    if qtype == "finite":
        if "file" not in sec or "images" not in sec:
            raise ValidationError(
                "[quotient] type=finite needs file= (table) and images=")
        images = _ints(sec["images"])
        return FiniteQuotient.from_file(
            d, os.path.join(base_dir, sec["file"]), images)
    if qtype == "abelian":
        if "rank" not in sec or "vectors" not in sec:
            raise ValidationError(
                "[quotient] type=abelian needs rank= and vectors=")
        rank = int(sec["rank"])
        vectors = _vectors(sec["vectors"])
        return FreeAbelianQuotient(d, rank, vectors)
    if qtype == "freekill":
        if "killed" not in sec:
            raise ValidationError("[quotient] type=freekill needs killed=")
        killed = _ints(sec["killed"])
        bad = [k for k in killed if not 1 <= k <= d]
        if bad:
            raise ValidationError(
                f"killed generator indices must be in 1..{d} "
                f"(1-based), got {bad}")
        return FreeKillQuotient(d, killed={k - 1 for k in killed})
    raise ValidationError(
        f"unknown quotient type {qtype!r} "
        f"(expected none|finite|abelian|freekill)")


def load_config(path):
    """Parse and validate a run configuration; fails before any
    computation starts."""
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    cp = ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(raw.decode("utf-8"))
    except Exception as exc:
        raise ValidationError(f"config parse error: {exc}")
    for section in cp.sections():
        if section not in _ALLOWED:
            raise ValidationError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _ALLOWED[section]:
                raise ValidationError(
                    f"unknown key {key!r} in [{section}] "
                    f"(allowed: {sorted(_ALLOWED[section])})")
    if not cp.has_section("model") or "d" not in cp["model"]:
        raise ValidationError("config must set d in a [model] section")
    d = int(cp["model"]["d"])
    if d < 2:
        raise ValidationError(f"d must be >= 2, got {d}")
    seed = int(cp["model"].get("seed", "0"))
    base_dir = os.path.dirname(os.path.abspath(path))

    zeta = _build_zeta(cp, d, base_dir)
    psi = _build_psi(cp, d, base_dir)
    quotient = _build_quotient(cp, d, base_dir)

    grid = cp["grid"] if cp.has_section("grid") else {}
    beta_min = float(grid.get("beta_min", -4.0))
    beta_max = float(grid.get("beta_max", 4.0))
    beta_step = float(grid.get("beta_step", 0.05))
    if not (beta_max > beta_min and beta_step > 0):
        raise ValidationError(
            f"bad beta grid [{beta_min}, {beta_max}] step {beta_step}")
    count = int(round((beta_max - beta_min) / beta_step))
    betas = np.linspace(beta_min, beta_max, count + 1)
    alpha_count = int(grid.get("alpha_count", len(betas)))
    if alpha_count < 1:
        raise ValidationError("alpha_count must be >= 1")

    tols = cp["tolerances"] if cp.has_section("tolerances") else {}
    tol_eigen = float(tols.get("eigen", 1e-13))
    tol_bisection = float(tols.get("bisection", 1e-10))
    sigma_factor = float(tols.get("sigma_factor", 3.0))
    if min(tol_eigen, tol_bisection) <= 0 or sigma_factor <= 0:
        raise ValidationError("tolerances must be positive")

    budgets = cp["budgets"] if cp.has_section("budgets") else {}
    n_max = int(budgets.get("n_max", 40))
    max_states = int(budgets.get("max_states", 50_000_000))
    gibbs_len = int(budgets.get("gibbs_len", 8))
    horizon = int(budgets.get("horizon", 30))
    return_length = int(budgets.get("return_length", 6))
    for name, v in [("n_max", n_max), ("max_states", max_states),
                    ("gibbs_len", gibbs_len), ("horizon", horizon),
                    ("return_length", return_length)]:
        if v < 1:
            raise ValidationError(f"budget {name} must be >= 1, got {v}")

    out_dir = cp["output"].get("directory", ".") \
        if cp.has_section("output") else "."
    out_dir = os.path.join(base_dir, out_dir)

    return RunConfig(d, zeta, psi, quotient, betas, alpha_count, tol_eigen,
                     tol_bisection, sigma_factor, n_max, max_states,
                     gibbs_len, horizon, return_length, out_dir, seed,
                     digest)
