"""Decision procedures over the system matrices.

Three independent questions are answered here, all reading only the
coefficient matrices (never trajectories):

* positivity classification: A Metzler and B, C, D, E nonnegative is both
  sufficient and (given the row-sum conditions and positive initial
  delays) necessary for the system to map nonnegative data to nonnegative
  trajectories;
* global attractivity: for the positive class, the effective matrix
  A + B + E (I-D)^{-1} C being Hurwitz is equivalent to attractivity in
  the homogeneous case and sufficient under vanishing forcing;
* smallest asymptotic bound: with bounded nonnegative forcing capped by
  (F, G) componentwise, the limit superior of solutions is
  x* = -[A + B + E(I-D)^{-1}C]^{-1} [F + E(I-D)^{-1}G],
  y* = (I-D)^{-1} (C x* + G),
  sharp when every row of (I-D)^{-1}C has a strictly positive entry and
  an upper bound otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import matrix_analysis as ma
from .errors import DimensionError, DomainError, SingularMatrixError
from .system_model import MultiOrderSystem, TimeExpr

__all__ = [
    "PositivityDetail",
    "AttractivityResult",
    "AsymptoticBound",
    "AnalysisReport",
    "classify_positivity",
    "effective_matrix",
    "check_attractivity",
    "asymptotic_bound",
    "sup_bound_estimate",
    "analyze",
    "REGIMES",
]

REGIMES = ("auto", "homogeneous", "vanishing", "bounded")

# Entries of (I-D)^{-1} C above this count as strictly positive for the
# sharpness condition of the bound.
_STRICT_POS_TOL = 1e-12


@dataclass(frozen=True)
class PositivityDetail:
    """Per-matrix verdicts behind the positivity classification."""

    a_metzler: bool
    b_nonnegative: bool
    c_nonnegative: bool
    d_nonnegative: bool
    e_nonnegative: bool
    c1_row_sums_lt_one: bool
    d1_row_sums_lt_one: bool

    @property
    def positive(self) -> bool:
        """Conjunction of all conditions.

        The matrix sign conditions are necessary as well as sufficient for
        positivity (for some admissible delays), so False means "not
        positive for some admissible delays", not merely "unproven".
        """
        return (
            self.a_metzler
            and self.b_nonnegative
            and self.c_nonnegative
            and self.d_nonnegative
            and self.e_nonnegative
            and self.c1_row_sums_lt_one
            and self.d1_row_sums_lt_one
        )

    def to_dict(self) -> dict:
        return {
            "A_metzler": self.a_metzler,
            "B_nonnegative": self.b_nonnegative,
            "C_nonnegative": self.c_nonnegative,
            "D_nonnegative": self.d_nonnegative,
            "E_nonnegative": self.e_nonnegative,
            "c1_row_sums_lt_one": self.c1_row_sums_lt_one,
            "d1_row_sums_lt_one": self.d1_row_sums_lt_one,
            "positive": self.positive,
        }


def classify_positivity(system: MultiOrderSystem) -> PositivityDetail:
    """Evaluate the matrix sign conditions characterizing positivity."""
    return PositivityDetail(
        a_metzler=ma.is_metzler(system.A),
        b_nonnegative=ma.is_nonnegative(system.B),
        c_nonnegative=ma.is_nonnegative(system.C),
        d_nonnegative=ma.is_nonnegative(system.D),
        e_nonnegative=ma.is_nonnegative(system.E),
        c1_row_sums_lt_one=ma.row_sum_lt_one(system.C),
        d1_row_sums_lt_one=ma.row_sum_lt_one(system.D),
    )


def effective_matrix(system: MultiOrderSystem) -> np.ndarray:
    """A + B + E (I-D)^{-1} C; raises SingularMatrixError when I-D is singular."""
    n = system.dim_y
    resolvent_c = ma.solve(np.eye(n) - system.D, system.C, name="I - D")
    return system.A + system.B + system.E @ resolvent_c


@dataclass(frozen=True)
class AttractivityResult:
    """Attractivity verdict for the effective matrix.

    verdict is None when the spectral abscissa sits inside the decision
    tolerance ("indeterminate at tolerance"); margin is minus the
    abscissa, so positive margins mean attractive.  basis records which
    direction of the theory backs the verdict.
    """

    verdict: bool | None
    margin: float
    basis: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": "indeterminate" if self.verdict is None else self.verdict,
            "margin": self.margin,
            "basis": self.basis,
            "note": self.note,
        }


def check_attractivity(
    system: MultiOrderSystem,
    regime: str = "auto",
    tol: float = ma.DEFAULT_SPECTRAL_TOL,
) -> AttractivityResult:
    """Hurwitz test on the effective matrix, qualified by regime and positivity.

    For positive homogeneous systems the test is an exact characterization;
    with vanishing nonnegative forcing it is sufficient; if the positivity
    conditions fail, only the sufficient direction survives and the result
    says so.
    """
    regime = _resolve_regime(system, regime)
    summary = ma.spectral_summary(effective_matrix(system))
    abscissa = summary.spectral_abscissa
    verdict: bool | None
    if abs(abscissa) <= tol:
        verdict = None
    else:
        verdict = abscissa < -tol

    positive = classify_positivity(system).positive
    if not positive:
        basis = "sufficient direction only"
        note = "positivity conditions fail; the Hurwitz test is not necessary here"
    elif regime == "homogeneous":
        basis = "iff"
        note = "homogeneous positive system: Hurwitz effective matrix is equivalent to attractivity"
    elif regime == "vanishing":
        basis = "sufficient"
        note = "vanishing nonnegative forcing: Hurwitz effective matrix implies attractivity"
    else:
        basis = "sufficient"
        note = "bounded forcing: Hurwitz effective matrix implies the asymptotic bound applies"
    return AttractivityResult(verdict=verdict, margin=-abscissa, basis=basis, note=note)


@dataclass(frozen=True)
class AsymptoticBound:
    """Componentwise asymptotic bound (x*, y*) for forcing capped by (F, G).

    sharp is True when every row of H = (I-D)^{-1} C has a strictly
    positive entry; otherwise (x*, y*) is only an upper bound.
    """

    F: np.ndarray
    G: np.ndarray
    x_star: np.ndarray
    y_star: np.ndarray
    condition_ii_holds: bool

    @property
    def sharp(self) -> bool:
        return self.condition_ii_holds

    def to_dict(self) -> dict:
        return {
            "F": self.F.tolist(),
            "G": self.G.tolist(),
            "x_star": self.x_star.tolist(),
            "y_star": self.y_star.tolist(),
            "condition_ii_holds": self.condition_ii_holds,
            "sharp": self.sharp,
        }


def asymptotic_bound(system: MultiOrderSystem, F, G) -> AsymptoticBound:
    """Evaluate the closed-form bound; requires a Hurwitz effective matrix."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    d, n = system.dim_x, system.dim_y
    if F.shape != (d,):
        raise DimensionError(f"F must have shape ({d},), got {F.shape}")
    if G.shape != (n,):
        raise DimensionError(f"G must have shape ({n},), got {G.shape}")
    if np.any(F < 0.0) or np.any(G < 0.0):
        raise DomainError("F and G must be componentwise nonnegative")

    eff = effective_matrix(system)
    if not ma.is_hurwitz(eff):
        raise DomainError("asymptotic bound needs a Hurwitz effective matrix")

    eye_n = np.eye(n)
    resolvent_g = ma.solve(eye_n - system.D, G, name="I - D")
    x_star = ma.solve(eff, -(F + system.E @ resolvent_g), name="effective matrix")
    y_star = ma.solve(eye_n - system.D, system.C @ x_star + G, name="I - D")

    h_matrix = ma.solve(eye_n - system.D, system.C, name="I - D")
    condition_ii = bool(np.all(np.max(h_matrix, axis=1) > _STRICT_POS_TOL))
    return AsymptoticBound(F=F, G=G, x_star=x_star, y_star=y_star, condition_ii_holds=condition_ii)


def sup_bound_estimate(exprs, horizon: float, samples: int) -> np.ndarray:
    """Componentwise max of the expressions over a dense grid on [0, horizon].

    A sampled estimate only; exact caps should be passed in by the caller
    when known.
    """
    if samples < 1000:
        raise DomainError(f"samples must be >= 1000, got {samples!r}")
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise DomainError(f"horizon must be positive and finite, got {horizon!r}")
    ts = np.linspace(0.0, horizon, samples)
    out = np.full(len(exprs), -math.inf)
    for i, expr in enumerate(exprs):
        for t in ts:
            out[i] = max(out[i], expr(float(t)))
    return out


def _resolve_regime(system: MultiOrderSystem, regime: str) -> str:
    if regime not in REGIMES:
        raise DomainError(f"regime must be one of {REGIMES}, got {regime!r}")
    if regime != "auto":
        return regime
    return "homogeneous" if system.forcing_is_zero() else "bounded"


@dataclass
class AnalysisReport:
    """Full static-analysis result for one system."""

    regime: str
    positivity: PositivityDetail
    effective: np.ndarray
    effective_spectrum: ma.SpectralSummary
    attractive: AttractivityResult
    bound: AsymptoticBound | None = None
    sup_estimate_used: bool = False
    validation_failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        spectrum = {
            "eigenvalues": [[z.real, z.imag] for z in self.effective_spectrum.eigenvalues],
            "spectral_abscissa": self.effective_spectrum.spectral_abscissa,
            "spectral_radius": self.effective_spectrum.spectral_radius,
        }
        return {
            "regime": self.regime,
            "positivity": self.positivity.to_dict(),
            "effective_matrix": self.effective.tolist(),
            "effective_spectrum": spectrum,
            "attractive": self.attractive.to_dict(),
            "bound": self.bound.to_dict() if self.bound is not None else None,
            "sup_estimate_used": self.sup_estimate_used,
            "validation_failures": list(self.validation_failures),
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def summary_lines(self) -> list[str]:
        det = self.positivity
        lines = [
            f"regime: {self.regime}",
            "positivity: "
            + ("positive" if det.positive else "not positive (for some admissible delays)"),
            "  A Metzler: %s | B>=0: %s | C>=0: %s | D>=0: %s | E>=0: %s"
            % (
                det.a_metzler,
                det.b_nonnegative,
                det.c_nonnegative,
                det.d_nonnegative,
                det.e_nonnegative,
            ),
            "  row sums: (c1) %s | (d1) %s"
            % (det.c1_row_sums_lt_one, det.d1_row_sums_lt_one),
            "effective spectrum: abscissa = %.6g, radius = %.6g"
            % (
                self.effective_spectrum.spectral_abscissa,
                self.effective_spectrum.spectral_radius,
            ),
        ]
        verdict = self.attractive.verdict
        shown = "indeterminate at tolerance" if verdict is None else str(verdict)
        lines.append(
            f"attractive: {shown} (margin {self.attractive.margin:.6g}, {self.attractive.basis})"
        )
        if self.bound is not None:
            kind = "smallest asymptotic bound" if self.bound.sharp else "asymptotic upper bound"
            lines.append(f"{kind}:")
            lines.append("  x* = " + np.array2string(self.bound.x_star, precision=6))
            lines.append("  y* = " + np.array2string(self.bound.y_star, precision=6))
        return lines


def analyze(
    system: MultiOrderSystem,
    regime: str = "auto",
    F=None,
    G=None,
    sup_horizon: float = 200.0,
    sup_samples: int = 20_000,
) -> AnalysisReport:
    """Assemble the full report: positivity, attractivity, and (for the
    bounded-forcing regime) the asymptotic bound.

    F and G override the sampled supremum estimates of the forcing caps;
    in the homogeneous and vanishing regimes no bound is computed.
    """
    regime = _resolve_regime(system, regime)
    positivity = classify_positivity(system)
    eff = effective_matrix(system)
    spectrum = ma.spectral_summary(eff)
    attractive = check_attractivity(system, regime=regime)

    bound = None
    sup_used = False
    if regime == "bounded" and attractive.verdict:
        if F is None:
            F = sup_bound_estimate(system.f, sup_horizon, sup_samples)
            sup_used = True
        if G is None:
            G = sup_bound_estimate(system.g, sup_horizon, sup_samples)
            sup_used = True
        try:
            bound = asymptotic_bound(system, F, G)
        except SingularMatrixError:
            bound = None
    return AnalysisReport(
        regime=regime,
        positivity=positivity,
        effective=eff,
        effective_spectrum=spectrum,
        attractive=attractive,
        bound=bound,
        sup_estimate_used=sup_used,
    )
