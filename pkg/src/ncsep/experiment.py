"""Time sweeps of the separability pipeline, sign-change search and the toy model.

The toy model is the oscillator with ``hbar = 1``, masses ``(1, 4)``, bare
frequencies ``(1, 1)``, no momentum deformation and a position deformation
decaying as ``1/sqrt(1 + t)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect

from .canonical import OscillatorConfig, derived_params, normal_frequencies
from .covariance import commutative_blocks, moments_for
from .errors import DomainError, NCSepError, PartialResultsError
from .schedules import Constant, InverseSqrt
from .separability import Verdict, classify_ps, separability_report

#: crossing times quoted alongside the published toy-model closed form
REFERENCE_TRANSITIONS = (213.001, 275.331)

# (integer part, sqrt part) of each coefficient, constant term first
_TOY_COEFFS = (
    (2 ** 11 * 29038819, 2 ** 11 * 2642044),
    (2 ** 13 * 43306567, 2 ** 13 * 4360181),
    (2 ** 9 * 1776825135, 2 ** 9 * 199309604),
    (2 ** 9 * 2555083273, 2 ** 9 * 321598952),
    (2 ** 7 * 9004286997, 2 ** 7 * 1281090628),
    (2 ** 8 * 2486103583, 2 ** 8 * 402820658),
    (2 ** 5 * 6717167061, 2 ** 5 * 1248828188),
    (2 ** 5 * 1267439685, 2 ** 5 * 272489392),
    (2 ** 4 * 204010327, 2 ** 4 * 51198584),
    (-(2 ** 5) * 78689, -(2 ** 5) * 10264),
    (-(2 ** 3) * 14431, -(2 ** 3) * 2 ** 11),
    (3 * 2 ** 3, 0),
    (1, 0),
)

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def compensated_horner(coeffs: Sequence[float], x: float) -> tuple[float, float]:
    """Evaluate ``sum c_k x^k`` (constant first); returns ``(value, correction)``.

    Error-free transformations carry the rounding error of every Horner step,
    giving roughly twice-working-precision accuracy.
    """
    s = float(coeffs[-1])
    c = 0.0
    for a in reversed(coeffs[:-1]):
        p, pe = _two_prod(s, x)
        s, se = _two_sum(p, float(a))
        c = c * x + (pe + se)
    return s, c


def toy_ps_closed_form(t: float) -> float:
    """Published closed form of the toy-model separability functional."""
    if t < 0:
        raise DomainError("t must be non-negative")
    t7 = math.sqrt(7 * (15 + 8 * t)) / (1 + t)
    a_hi, a_lo = compensated_horner([c[0] for c in _TOY_COEFFS], t)
    b_hi, b_lo = compensated_horner([c[1] for c in _TOY_COEFFS], t)
    p, pe = _two_prod(t7, b_hi)
    num = math.fsum((a_hi, a_lo, p, pe, t7 * b_lo))
    return num / (16 * (2 + t) ** 12)


def toy_config(drives=(0.0, 0.0)) -> OscillatorConfig:
    return OscillatorConfig(m1=Constant(1.0), m2=Constant(4.0), w1=Constant(1.0), w2=Constant(1.0),
                            e1=Constant(drives[0]), e2=Constant(drives[1]),
                            theta=InverseSqrt(1.0, 1.0), eta=Constant(0.0), hbar=1.0)


def is_toy_config(cfg: OscillatorConfig) -> bool:
    """True when ``cfg`` matches the toy model up to its drives (which do not enter Ps)."""
    ref = toy_config()
    keys = ("m1", "m2", "w1", "w2", "theta", "eta", "hbar")
    return all(getattr(cfg, k) == getattr(ref, k) for k in keys)


def pipeline_report(cfg: OscillatorConfig, t: float, n=(0, 0), convention: str = "physical"):
    dp = derived_params(cfg, t)
    qm = moments_for(dp, n[0], n[1], convention)
    report = separability_report(commutative_blocks(qm), cfg.hbar, gaussian=qm.gaussian)
    return dp, report


def toy_pipeline_ps(t: float, convention: str = "paper") -> float:
    """Separability functional of the toy model's vacuum through the full pipeline."""
    if t < 0:
        raise DomainError("t must be non-negative")
    return pipeline_report(toy_config(), t, (0, 0), convention)[1].ps


@dataclass(frozen=True)
class SweepRecord:
    t: float
    lambda1: float
    lambda2: float
    delta1: float
    delta2: float
    delta12: float
    tau_v: float
    ps: float
    ps_closed_form: float | None
    rsup_ok: bool
    verdict: str
    gaussian: bool = True


SWEEP_COLUMNS = ("t", "lambda1", "lambda2", "delta1", "delta2", "delta12", "tau_v", "ps",
                 "ps_closed_form", "rsup_ok", "verdict")


def make_grid(t_start: float, t_end: float, t_step: float) -> np.ndarray:
    """Inclusive grid ``t_start + k t_step``; empty when ``t_end < t_start``."""
    if not t_step > 0:
        raise DomainError("t_step must be positive")
    if t_end < t_start:
        return np.empty(0)
    n = int(math.floor((t_end - t_start) / t_step + 1e-9)) + 1
    return t_start + t_step * np.arange(n)


def sweep(cfg: OscillatorConfig, times, n=(0, 0), convention: str = "physical",
          closed_form: Callable[[float], float] | None = None) -> list[SweepRecord]:
    """Evaluate the pipeline at every grid time.

    Raises
    ------
    PartialResultsError
        When any grid point fails; carries the records computed so far.
    """
    records = []
    for t in times:
        t = float(t)
        try:
            dp, rep = pipeline_report(cfg, t, n, convention)
            l1, l2 = normal_frequencies(dp)
            ref = closed_form(t) if closed_form is not None else None
        except (NCSepError, ValueError, ArithmeticError) as exc:
            raise PartialResultsError(f"pipeline failed at t={t}: {exc}", records) from exc
        records.append(SweepRecord(t, l1, l2, rep.delta1, rep.delta2, rep.delta12, rep.tau_v,
                                   rep.ps, ref, rep.rsup_ok, rep.verdict.value, rep.gaussian))
    return records


@dataclass(frozen=True)
class Transition:
    t: float
    direction: str


def _sign(verdict: str) -> int:
    return {"separable": 1, "entangled": -1}.get(verdict, 0)


def find_transitions(records: Sequence[SweepRecord], refine_tol: float = 1e-3,
                     func: Callable[[float], float] | None = None) -> list[Transition]:
    """Sign changes of ``ps`` between consecutive non-marginal records.

    Each bracket is refined by bisection on ``func`` to ``refine_tol``; without
    ``func`` the crossing is linearly interpolated between the records.
    """
    signed = [r for r in records if _sign(r.verdict) != 0]
    out = []
    for a, b in zip(signed, signed[1:]):
        sa, sb = _sign(a.verdict), _sign(b.verdict)
        if sa == sb:
            continue
        if func is not None:
            t = bisect(func, a.t, b.t, xtol=refine_tol)
        else:
            t = a.t + (b.t - a.t) * a.ps / (a.ps - b.ps)
        direction = "separable->entangled" if sa > 0 else "entangled->separable"
        out.append(Transition(float(t), direction))
    return out


@dataclass(frozen=True)
class SignRun:
    t_start: float
    t_end: float
    verdict: str


def sign_runs(records: Sequence[SweepRecord]) -> list[SignRun]:
    """Maximal stretches of records sharing a verdict."""
    runs: list[SignRun] = []
    for r in records:
        if runs and runs[-1].verdict == r.verdict:
            runs[-1] = SignRun(runs[-1].t_start, r.t, r.verdict)
        else:
            runs.append(SignRun(r.t, r.t, r.verdict))
    return runs


def closed_form_verdict(value: float) -> str:
    return classify_ps(value).value


def sign_disagreements(records: Sequence[SweepRecord]) -> list[float]:
    """Grid times where the pipeline and the attached closed form classify differently."""
    return [r.t for r in records
            if r.ps_closed_form is not None and closed_form_verdict(r.ps_closed_form) != r.verdict]


@dataclass
class ToyReport:
    records: list
    transitions: list
    closed_form_transitions: list
    runs: list
    disagreements: list
    reference: tuple = REFERENCE_TRANSITIONS
    convention: str = "paper"

    @property
    def reproduced(self) -> bool:
        if self.disagreements or len(self.transitions) != len(self.reference):
            return False
        return all(abs(tr.t - ref) <= 0.5 for tr, ref in zip(self.transitions, self.reference))

    def summary(self) -> dict:
        return {
            "convention": self.convention,
            "transitions": [asdict(t) for t in self.transitions],
            "closed_form_transitions": [asdict(t) for t in self.closed_form_transitions],
            "reference_transitions": list(self.reference),
            "runs": [asdict(r) for r in self.runs],
            "sign_disagreements": len(self.disagreements),
            "first_disagreement": self.disagreements[0] if self.disagreements else None,
            "reproduced": self.reproduced,
        }


def run_toy(t_start: float = 0.0, t_end: float = 400.0, t_step: float = 0.5,
            refine_tol: float = 1e-3, convention: str = "paper") -> ToyReport:
    """Sweep the toy model, locate transitions of both the pipeline and the closed form."""
    cfg = toy_config()
    times = make_grid(t_start, t_end, t_step)
    records = sweep(cfg, times, (0, 0), convention, toy_ps_closed_form)
    transitions = find_transitions(records, refine_tol, lambda t: toy_pipeline_ps(t, convention))
    cf_records = [SweepRecord(r.t, r.lambda1, r.lambda2, 0, 0, 0, 0, r.ps_closed_form, None, True,
                              closed_form_verdict(r.ps_closed_form)) for r in records]
    cf_transitions = find_transitions(cf_records, refine_tol, toy_ps_closed_form)
    return ToyReport(records, transitions, cf_transitions, sign_runs(records),
                     sign_disagreements(records), convention=convention)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return f"{float(value):.17g}"


def write_records_csv(records: Sequence[SweepRecord], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in SWEEP_COLUMNS])


def records_to_json(records: Sequence[SweepRecord]) -> list[dict]:
    return [{c: getattr(r, c) for c in SWEEP_COLUMNS} for r in records]


def write_json(obj, stream) -> None:
    json.dump(obj, stream, indent=2, allow_nan=False)
    stream.write("\n")
