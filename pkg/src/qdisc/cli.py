"""qdisc command line: scenario reports, ROC sweeps, lambda_min tables, figure data and verification.

Exit codes: 0 success, 1 invalid input, 2 verification failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import click
import numpy as np

from qdisc import bayes, figures, min_detect, neyman_pearson, noise, verify
from qdisc.core import (
    DEFAULT_TOL,
    PAULI,
    QDiscError,
    bell_diagonal,
    bell_state,
    bloch_to_density,
    bloch_vector,
    expectation,
    perturb,
    pure_state,
    purity,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY = 2


class VerificationFailure(Exception):
    pass


# --- parsing ------------------------------------------------------------------


def tolerance_from_env() -> float:
    raw = os.environ.get("QDISC_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise click.BadParameter(f"QDISC_TOL={raw!r} is not a number") from None
    if not (tol > 0 and math.isfinite(tol)):
        raise click.BadParameter(f"QDISC_TOL must be a positive finite number, got {raw!r}")
    return tol


def parse_reals(text: str, count: Optional[int] = None, name: str = "value") -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise click.BadParameter(f"{name} must be comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise click.BadParameter(f"{name} needs {count} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise click.BadParameter(f"{name} must be finite")
    return vals


def parse_complex(text: str, count: int, name: str = "amplitudes") -> tuple[complex, ...]:
    try:
        vals = tuple(complex(x.strip().replace("i", "j")) for x in text.split(","))
    except ValueError:
        raise click.BadParameter(f"{name} must be comma-separated complex numbers, got {text!r}") from None
    if len(vals) != count:
        raise click.BadParameter(f"{name} needs {count} entries, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str  # bloch | bell | bell_diag | amplitudes
    data: object
    rho0: np.ndarray
    axis: int
    lam: float
    priors: bayes.Priors
    noise_label: Optional[str] = None
    noise_params: tuple[float, ...] = ()

    def pair(self) -> tuple[np.ndarray, np.ndarray]:
        return self.rho0, perturb(self.rho0, self.lam, self.axis)

    @property
    def noisy(self) -> bool:
        return self.noise_label is not None


def build_scenario(
    bloch: Optional[str],
    bell: Optional[str],
    bell_diag: Optional[str],
    amplitudes: Optional[str],
    axis: int,
    lam: float,
    degrees: bool,
    priors: str,
    noise_label: Optional[str],
    noise_params: Optional[str],
) -> ScenarioSpec:
    given = [x is not None for x in (bloch, bell, bell_diag, amplitudes)]
    if sum(given) != 1:
        raise click.UsageError("give exactly one of --bloch, --bell, --bell-diag, --amplitudes")
    if degrees:
        lam = math.radians(lam)
    z = parse_reals(priors, 2, "priors")
    pri = bayes.Priors(*z)
    if bloch is not None:
        data = tuple(bloch_vector(parse_reals(bloch, 3, "bloch")))
        kind, rho0 = "bloch", bloch_to_density(data)
    elif bell is not None:
        kind, data, rho0 = "bell", bell, bell_state(bell)
    elif bell_diag is not None:
        data = parse_reals(bell_diag, 4, "bell-diag")
        kind, rho0 = "bell_diag", bell_diagonal(data)
    else:
        data = parse_complex(amplitudes, 4)
        kind, rho0 = "amplitudes", pure_state(data)
    params: tuple[float, ...] = ()
    if noise_label is not None:
        if rho0.shape[0] != 4:
            raise click.UsageError("noise channels act on two-qubit preparations")
        params = parse_reals(noise_params or "", None, "noise-params") if noise_params else ()
        rho0 = noise.apply_channel(rho0, noise.make_channel(noise_label, params))
    return ScenarioSpec(kind, data, rho0, axis, lam, pri, noise_label, params)


def scenario_options(f):
    opts = [
        click.option("--bloch", help="Qubit Bloch vector x,y,z."),
        click.option("--bell", type=click.Choice(["phi+", "phi-", "psi+", "psi-"]), help="Bell state."),
        click.option("--bell-diag", help="Bell-diagonal weights p0,p1,p2,p3 (phi+, psi+, psi-, phi-)."),
        click.option("--amplitudes", help="Two-qubit amplitudes a0,a1,a2,a3 (complex allowed, e.g. 1j)."),
        click.option("--axis", type=click.IntRange(1, 3), default=1, show_default=True, help="Generator axis."),
        click.option("--lambda", "lam", type=float, required=True, help="Perturbation amplitude."),
        click.option("--priors", default="0.5,0.5", show_default=True, help="Priors z0,z1."),
        click.option("--noise", "noise_label", type=click.Choice(list(noise.LABELS)), help="Noise on both qubits."),
        click.option("--noise-params", help="Noise parameters, e.g. p,q (or p for depolarizing)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def output_options(f):
    f = click.option("--degrees", is_flag=True, help="Read angles in degrees instead of radians.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(f)
    f = click.option("--output", "-o", type=click.Path(dir_okay=False, writable=True), help="Output file (default stdout).")(f)
    return f


# --- emission -----------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "NA"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else (str(v) if math.isinf(v) else v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(columns: Sequence[str], rows: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        records = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(columns: Sequence[str], rows: Sequence[dict], fmt: str, output: Optional[str]) -> None:
    text = render(columns, rows, fmt)
    if output:
        with open(output, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


# --- commands ------------------------------------------------------------------


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Quantum binary decision theory for detecting qubit perturbations."""


def _bayes_rows(spec: ScenarioSpec, tol: float) -> list[dict]:
    rho0, rho1 = spec.pair()
    res = bayes.helstrom_pe(rho0, rho1, spec.priors, tol)
    rows = [{"quantity": "helstrom_oracle", "value": res.pe, "delta": 0.0, "note": f"regime={res.regime.value}"}]

    def add(name: str, value: float, note: str = ""):
        rows.append({"quantity": name, "value": value, "delta": abs(value - res.pe), "note": note})

    if spec.noisy:
        if spec.kind == "bell" and spec.data == "phi+" and spec.axis == 1 and spec.priors.is_equal:
            add(f"pe_noisy[{spec.noise_label}]", noise.pe_noisy(spec.noise_label, spec.noise_params, spec.lam))
        return rows
    if spec.kind == "bloch":
        add("pe_single_qubit", bayes.pe_single_qubit(spec.data, spec.lam, spec.priors, spec.axis))
        if spec.priors.is_equal:
            r = np.asarray(spec.data)
            add("pe_single_qubit_purity", bayes.pe_single_qubit_purity(purity(rho0), float(r[spec.axis - 1]), spec.lam))
    if abs(purity(rho0) - 1) <= 1e-12:
        add("pe_pure_overlap", bayes.pe_pure_overlap(_pure_kappa2(rho0, spec.lam, spec.axis), spec.priors))
    if spec.kind in ("bell", "amplitudes"):
        vec = _two_qubit_amplitudes(spec)
        if bayes.check_optimal_class(vec, spec.axis):
            add("pe_two_qubit_singlet", bayes.pe_two_qubit_singlet(spec.lam, spec.priors), "optimal class")
    if spec.kind == "bell_diag" and spec.axis == 1 and spec.priors.is_equal:
        add("pe_bell_diagonal[corrected]", bayes.pe_bell_diagonal(spec.data, spec.lam, "corrected"))
        add("pe_bell_diagonal[as_printed]", bayes.pe_bell_diagonal(spec.data, spec.lam, "as_printed"), "literature variant")
    return rows


def _pure_kappa2(rho0: np.ndarray, lam: float, axis: int) -> float:
    # |<psi|U|psi>|^2 = cos^2 + sin^2 <sigma_k>^2, free of the cancellation in 1 - tr(rho0 rho1)
    gen = PAULI[axis] if rho0.shape[0] == 2 else np.kron(PAULI[axis], np.eye(2))
    m = expectation(rho0, gen)
    return min(1.0, math.cos(lam) ** 2 + math.sin(lam) ** 2 * m * m)


def _two_qubit_amplitudes(spec: ScenarioSpec) -> np.ndarray:
    if spec.kind == "amplitudes":
        return np.asarray(spec.data, dtype=complex)
    from qdisc.core import BELL_VECTORS

    return BELL_VECTORS[spec.data]


@cli.command("bayes")
@scenario_options
@output_options
def cmd_bayes(output, fmt, degrees, **kw):
    """Minimum-error probability: oracle value, matching closed forms and their deltas."""
    spec = build_scenario(degrees=degrees, **kw)
    emit(["quantity", "value", "delta", "note"], _bayes_rows(spec, tolerance_from_env()), fmt, output)


def _roc_closed_form(spec: ScenarioSpec):
    """(critical gammas, function (gamma, oracle point) -> closed-form p11) or None."""
    rho0, rho1 = spec.pair()
    if spec.noisy:
        return [], None
    if abs(purity(rho0) - 1) <= 1e-12:
        kappa2 = _pure_kappa2(rho0, spec.lam, spec.axis)
        return [], lambda g, pt: neyman_pearson.p11_pure(kappa2, min(1.0, max(0.0, pt.p10)))
    if spec.kind == "bloch" and spec.axis == 1:
        r = spec.data
        r2 = float(np.dot(r, r))
        if 0 < r2 < 1:
            kappa2 = neyman_pearson.mixed_kappa2(r2, r[0] ** 2, spec.lam)
            crit = list(neyman_pearson.critical_gammas_mixed(r2, kappa2))
            return crit, lambda g, pt: neyman_pearson.np_mixed_parametric(r, spec.lam, g).p11
    if spec.kind == "bell_diag" and spec.axis == 1:
        w = spec.data
        crit = [
            g
            for pa, pb in ((w[0], w[1]), (w[2], w[3]))
            for g in neyman_pearson.xi_and_critical_gammas(pa, pb, spec.lam)[1:3]
        ]
        return crit, lambda g, pt: neyman_pearson.characteristic_bell_diagonal(w, spec.lam, g).p11
    return [], None


@cli.command("roc")
@scenario_options
@click.option("--gamma-min", type=float, default=1e-4, show_default=True)
@click.option("--gamma-max", type=float, default=1e4, show_default=True)
@click.option("--points", type=click.IntRange(2, None), default=512, show_default=True)
@click.option("--grid", "grid_kind", type=click.Choice(["log", "linear"]), default="log", show_default=True)
@output_options
def cmd_roc(output, fmt, degrees, gamma_min, gamma_max, points, grid_kind, **kw):
    """Neyman-Pearson ROC points over a multiplier sweep, with the closed form where one applies."""
    spec = build_scenario(degrees=degrees, **kw)
    if not (0 <= gamma_min < gamma_max) or (grid_kind == "log" and gamma_min <= 0):
        raise click.BadParameter("need 0 <= gamma-min < gamma-max (and gamma-min > 0 for a log grid)")
    tol = tolerance_from_env()
    crit, closed = _roc_closed_form(spec)
    base = np.geomspace(gamma_min, gamma_max, points) if grid_kind == "log" else np.linspace(gamma_min, gamma_max, points)
    grid = np.unique(np.r_[base, [g for g in crit if gamma_min <= g <= gamma_max]])
    rho0, rho1 = spec.pair()
    rows = []
    for g in grid:
        pt = neyman_pearson.roc_point(rho0, rho1, float(g), tol)
        cf = closed(float(g), pt) if closed else math.nan
        rows.append({"gamma": float(g), "p10": pt.p10, "p11": pt.p11, "closed_form_p11": cf, "delta": abs(cf - pt.p11)})
    rows.sort(key=lambda r: (r["p10"], r["p11"], -r["gamma"]))
    emit(["gamma", "p10", "p11", "closed_form_p11", "delta"], rows, fmt, output)


def _lambda_min_closed(kind: str, crit: min_detect.DetectionCriterion, r1: float, r2: float, p10: float, amps):
    if kind == "pure":
        if crit.kind is min_detect.CriterionKind.ABSOLUTE:
            return min_detect.lambda_min_pure_absolute(r1, p10)
        return min_detect.lambda_min_pure_relative(r1, p10, crit.delta)
    if crit.kind is min_detect.CriterionKind.RELATIVE:
        return None
    if kind == "mixed":
        return min_detect.lambda_min_mixed(r2, r1, p10)
    if amps is None or bayes.check_optimal_class(amps, 1):
        return min_detect.lambda_min_two_qubit(p10)
    return None


def _lambda_min_scenario(kind: str, r1: float, r2: float, amps) -> min_detect.Scenario:
    if kind == "pure":
        return min_detect.Scenario.pure_qubit(r1)
    if kind == "mixed":
        return min_detect.Scenario.mixed_qubit(r2, r1)
    return min_detect.Scenario.bell("psi-") if amps is None else min_detect.Scenario.two_qubit(amps)


@cli.command("lambda-min")
@click.option("--state", "kind", type=click.Choice(["pure", "mixed", "two-qubit"]), default="pure", show_default=True)
@click.option("--r1", type=float, default=0.0, show_default=True, help="Bloch component along the generator.")
@click.option("--r2", type=float, default=1.0, show_default=True, help="Squared Bloch length (mixed states).")
@click.option("--amplitudes", help="Two-qubit amplitudes (default: singlet).")
@click.option("--criterion", type=click.Choice(["absolute", "relative"]), default="absolute", show_default=True)
@click.option("--delta", type=float, help="Ratio for the relative criterion.")
@click.option("--p10", type=float, help="A single false-alarm level.")
@click.option("--p10-sweep", help="lo,hi,n: evenly spaced false-alarm levels.")
@click.option("--oracle/--no-oracle", default=True, show_default=True, help="Also run the numeric solver.")
@output_options
def cmd_lambda_min(output, fmt, degrees, kind, r1, r2, amplitudes, criterion, delta, p10, p10_sweep, oracle):
    """Minimum detectable perturbation (radians); NA marks a criterion no lambda can meet."""
    if (p10 is None) == (p10_sweep is None):
        raise click.UsageError("give exactly one of --p10 and --p10-sweep")
    if p10 is not None:
        levels = [p10]
    else:
        lo, hi, n = parse_reals(p10_sweep, 3, "p10-sweep")
        if not (n >= 2 and float(n).is_integer() and lo < hi):
            raise click.BadParameter("p10-sweep needs lo < hi and an integer count >= 2")
        levels = list(np.linspace(lo, hi, int(n)))
    crit = (
        min_detect.DetectionCriterion.absolute()
        if criterion == "absolute"
        else min_detect.DetectionCriterion.relative(delta if delta is not None else math.nan)
    )
    if kind == "pure":
        r2 = 1.0
    amps = parse_complex(amplitudes, 4) if (kind == "two-qubit" and amplitudes) else None
    tol = tolerance_from_env()
    scn = _lambda_min_scenario(kind, r1, r2, amps)
    rows = []
    for x in levels:
        x = float(x)
        cf = _lambda_min_closed(kind, crit, r1, r2, x, amps)
        num = min_detect.lambda_min_numeric(scn, crit, x, tol) if oracle else None
        cf_val = cf.as_float() if cf else math.nan
        num_val = num.as_float() if num else math.nan
        d = abs(cf_val - num_val) if (cf and num and cf.detectable and num.detectable) else math.nan
        rows.append(
            {
                "p10": x,
                "closed_form": cf_val,
                "oracle": num_val,
                "delta": d,
                "constraint_ok": cf.constraint_ok if cf else None,
                "closed_form_applicable": cf.closed_form_applicable if cf else False,
                "method": cf.method if cf else (num.method if num else None),
            }
        )
    cols = ["p10", "closed_form", "oracle", "delta", "constraint_ok", "closed_form_applicable", "method"]
    emit(cols, rows, fmt, output)


@cli.command("figure")
@click.argument("name", type=click.Choice(sorted(figures.FIGURES)))
@click.option("--points", type=click.IntRange(2, None), help="Grid resolution.")
@click.option("--lambda", "lam", type=float, help="Perturbation amplitude (fig7 only; default pi/4).")
@output_options
def cmd_figure(output, fmt, degrees, name, points, lam):
    """Data for the characteristic-function and detectability figures, as one long table."""
    kw = {}
    if points is not None:
        kw["points"] = points
    if lam is not None:
        if name != "fig7":
            raise click.UsageError("--lambda applies to fig7 only")
        kw["lam"] = math.radians(lam) if degrees else lam
    columns, rows = figures.build(name, **kw)
    emit(columns, rows, fmt, output)


@cli.command("verify")
@click.option("--grid", type=click.IntRange(2, None), default=25, show_default=True, help="Grid density per check.")
@click.option("--only", multiple=True, help="Run only the named check (repeatable).")
@output_options
def cmd_verify(output, fmt, degrees, grid, only):
    """Compare every closed form with the brute-force oracle; exit 2 on an unexpected deviation."""
    results = verify.run_all(grid, tolerance_from_env(), only or None)
    emit(verify.COLUMNS, [r.as_row() for r in results], fmt, output)
    failed = [r for r in results if r.status == verify.FAIL]
    if failed:
        lines = [f"{r.name}: max_delta={_cell(r.max_delta)} > {r.tolerance:g} at {r.worst_params}" for r in failed]
        raise VerificationFailure("verification failed:\n" + "\n".join(lines))


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="qdisc", standalone_mode=False)
    except VerificationFailure as exc:
        click.echo(str(exc), err=True)
        return EXIT_VERIFY
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_INVALID
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except (QDiscError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
