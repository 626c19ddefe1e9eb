"""Run configuration, sweep drivers, and deterministic table output.

The config format is flat ``key = value`` text: one entry per line, ``#``
starts a comment, unknown keys are hard errors (silent typos in physics
parameters are the main operator hazard).  Output tables are byte-stable:
fixed row order, floats always printed with 17 significant digits and a
lowercase exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .closedform import (
    DEFAULT_GUARD,
    classify_dispersion_regime,
    dispersion_approx,
    dispersion_exact,
    elliptic_classical_average,
    elliptic_quantum_average,
    hyperbolic_classical_xn,
    hyperbolic_xn_average,
    hyperbolic_xn_log10_magnitude,
)
from .core import (
    CollapseProximity,
    ConfigError,
    DomainError,
    EvolutionSeries,
    Monomial,
    ObservableSpec,
    Source,
    SystemParams,
    XPower,
    make_hyperbolic_params,
)
from .fock import oracle_average

APPROACH_EXPONENTS = (2, 3, 4, 5, 6)  # distances t_ell * 10^-k for collapse scans


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    kind: str = "hyperbolic"
    omega: float = 1.0
    mu: float = 0.1
    hbar: float = 0.1
    alpha: complex = 1.0 + 0j
    observable: ObservableSpec = XPower(1)
    t_min: float = 0.0
    t_max: float = 1.0
    points: int = 21
    sources: tuple[str, ...] = ("closed", "classical")
    guard: float = DEFAULT_GUARD
    out_format: str = "csv"
    out: Optional[str] = None
    seed: int = 0  # reserved for sampled property sweeps; recorded in metadata
    oracle_tol: float = 1e-6
    oracle_start_dim: int = 64
    oracle_dim_cap: int = 8192
    tail_tol: float = 1e-14
    ell_min: int = 0
    ell_max: int = 2
    hbar_list: tuple[float, ...] = ()
    breakdown_threshold: float = 1.0
    bisect_rel: float = 1e-4
    regime_ratio: float = 10.0
    regime_slack: float = 10.0
    raw_items: tuple[tuple[str, str], ...] = field(default=(), repr=False)

    @property
    def params(self) -> SystemParams:
        if self.kind == "hyperbolic":
            return make_hyperbolic_params(self.omega, self.mu, self.hbar)
        return SystemParams(self.omega, self.mu, self.hbar)

    def time_grid(self) -> list[float]:
        if self.points < 1:
            raise ConfigError("points must be >= 1")
        if self.points == 1:
            return [self.t_min]
        if not self.t_max > self.t_min:
            raise ConfigError("time grid needs t_max > t_min")
        step = (self.t_max - self.t_min) / (self.points - 1)
        return [self.t_min + k * step for k in range(self.points)]

    def metadata(self, command: str) -> list[tuple[str, str]]:
        items = [("command", command)]
        items += [(k, v) for k, v in self.raw_items]
        return items


def _parse_observable(text: str) -> ObservableSpec:
    text = text.strip()
    if text.startswith("x^"):
        return XPower(int(text[2:]))
    if text == "x":
        return XPower(1)
    if text.startswith("mono:"):
        m_str, q_str = text[5:].split(",")
        return Monomial(int(m_str), int(q_str))
    raise ConfigError(f"cannot parse observable {text!r} (use 'x^N' or 'mono:M,Q')")


def _parse_sources(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    allowed = {"closed", "classical", "oracle"}
    for name in names:
        if name not in allowed:
            raise ConfigError(f"unknown source {name!r} (allowed: closed,classical,oracle)")
    if not names:
        raise ConfigError("sources must not be empty")
    return names


_KEY_PARSERS = {
    "kind": ("kind", str),
    "omega": ("omega", float),
    "mu": ("mu", float),
    "hbar": ("hbar", float),
    "alpha": ("alpha", complex),
    "observable": ("observable", _parse_observable),
    "t_min": ("t_min", float),
    "t_max": ("t_max", float),
    "points": ("points", int),
    "sources": ("sources", _parse_sources),
    "guard": ("guard", float),
    "format": ("out_format", str),
    "out": ("out", str),
    "seed": ("seed", int),
    "oracle_tol": ("oracle_tol", float),
    "oracle_start_dim": ("oracle_start_dim", int),
    "oracle_dim_cap": ("oracle_dim_cap", int),
    "tail_tol": ("tail_tol", float),
    "ell_min": ("ell_min", int),
    "ell_max": ("ell_max", int),
    "hbar_list": ("hbar_list", lambda s: tuple(float(x) for x in s.split(","))),
    "breakdown_threshold": ("breakdown_threshold", float),
    "bisect_rel": ("bisect_rel", float),
    "regime_ratio": ("regime_ratio", float),
    "regime_slack": ("regime_slack", float),
}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines into a validated :class:`RunConfig`.

    Raises
    ------
    ConfigError
        On unknown keys, malformed lines, or unparsable values.
    """
    fields: dict = {}
    raw: list[tuple[str, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, parser = _KEY_PARSERS[key]
        if attr in fields:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            fields[attr] = parser(value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
        raw.append((key, value))
    config = RunConfig(**fields, raw_items=tuple(sorted(raw)))
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    if config.kind not in ("hyperbolic", "elliptic"):
        raise ConfigError(f"kind must be hyperbolic or elliptic, got {config.kind!r}")
    if config.out_format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {config.out_format!r}")
    if config.kind == "hyperbolic" and not isinstance(config.observable, XPower):
        raise ConfigError("hyperbolic runs accept the x^N observable only")
    if config.kind == "elliptic" and not isinstance(config.observable, Monomial):
        raise ConfigError("elliptic runs accept the mono:M,Q observable only")
    config.params  # raises DomainError for invalid physics parameters
    config.time_grid()


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------

def _closed_value(config: RunConfig, t: float) -> complex:
    obs = config.observable
    if isinstance(obs, XPower):
        return hyperbolic_xn_average(obs.n, config.alpha, config.params, t, config.guard)
    return elliptic_quantum_average(obs.m, obs.q, config.alpha, config.params, t)


def _classical_value(config: RunConfig, t: float) -> complex:
    obs = config.observable
    if isinstance(obs, XPower):
        return hyperbolic_classical_xn(obs.n, config.alpha, config.params, t)
    return elliptic_classical_average(obs.m, obs.q, config.alpha, config.params, t)


def _oracle_value(config: RunConfig, t: float) -> complex:
    obs = config.observable
    key = obs.n if isinstance(obs, XPower) else (obs.m, obs.q)
    return oracle_average(
        config.kind,
        config.params,
        config.alpha,
        key,
        t,
        tol=config.oracle_tol,
        start_dim=config.oracle_start_dim,
        dim_cap=config.oracle_dim_cap,
        tail_tol=config.tail_tol,
    )


def _flagged(config: RunConfig, t: float) -> bool:
    """True when the closed form declines to produce a finite value at t."""
    if not isinstance(config.observable, XPower):
        return False
    try:
        _closed_value(config, t)
    except CollapseProximity:
        return True
    return False


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

_SOURCE_BY_NAME = {
    "closed": Source.CLOSED_FORM,
    "classical": Source.CLASSICAL,
    "oracle": Source.FOCK_ORACLE,
}


@dataclass(frozen=True)
class TableResult:
    """Column names plus row tuples ready for the deterministic writers."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    series: dict = field(default_factory=dict)
    extra_meta: tuple[tuple[str, str], ...] = ()


def cmd_evolve(config: RunConfig) -> TableResult:
    """One aligned series per requested source over the configured grid."""
    grid = config.time_grid()
    flags = [_flagged(config, t) for t in grid]
    series: dict[Source, EvolutionSeries] = {}
    rows = []
    for name in ("closed", "classical", "oracle"):
        if name not in config.sources:
            continue
        source = _SOURCE_BY_NAME[name]
        values: list = []
        for t, flagged in zip(grid, flags):
            if flagged:
                values.append(None)
                continue
            if name == "closed":
                values.append(_closed_value(config, t))
            elif name == "classical":
                values.append(_classical_value(config, t))
            else:
                values.append(_oracle_value(config, t))
        series[source] = EvolutionSeries(
            times=tuple(grid),
            values=tuple(values),
            source=source,
            collapse_flags=tuple(flags),
        )
        for t, value, flagged in zip(grid, values, flags):
            rows.append((t, value, name, flagged))
    return TableResult(
        columns=("t", "re(f)", "im(f)", "source", "collapse_flag"),
        rows=tuple(
            (t, None if v is None else v.real, None if v is None else v.imag, name, int(flagged))
            for (t, v, name, flagged) in rows
        ),
        series=series,
    )


def cmd_compare(config: RunConfig) -> TableResult:
    """Closed form against the truncated-basis oracle, with deviations."""
    grid = config.time_grid()
    rows = []
    worst = 0.0
    for t in grid:
        if _flagged(config, t):
            rows.append((t, None, None, None, None, None, 1))
            continue
        closed = _closed_value(config, t)
        orc = _oracle_value(config, t)
        rel = abs(closed - orc) / (abs(orc) + 1e-30)
        worst = max(worst, rel)
        rows.append((t, closed.real, closed.imag, orc.real, orc.imag, rel, 0))
    return TableResult(
        columns=(
            "t",
            "re(closed)",
            "im(closed)",
            "re(oracle)",
            "im(oracle)",
            "rel_deviation",
            "collapse_flag",
        ),
        rows=tuple(rows),
        extra_meta=(("max_rel_deviation", _fmt_float(worst)),),
    )


def cmd_collapse_scan(config: RunConfig, ell_range: "tuple[int, int] | None" = None) -> TableResult:
    """Log-magnitude approach sequences for each collapse time in the range.

    Magnitudes this close to collapse overflow float64, so the table reports
    ``log10 |f|`` on distances ``|t_ell| * 10^-k`` left of each ``t_ell``;
    monotone growth along each sequence demonstrates the blow-up.
    """
    obs = config.observable
    if not isinstance(obs, XPower):
        raise ConfigError("collapse-scan needs the x^N observable")
    params = config.params
    if params.mu == 0.0:
        raise DomainError("collapse-scan needs mu != 0 (no collapse in the quadratic limit)")
    lo, hi = ell_range if ell_range is not None else (config.ell_min, config.ell_max)
    if hi < lo:
        raise ConfigError("ell range must satisfy ell_min <= ell_max")
    base = math.pi / (16.0 * params.mu * obs.n * params.hbar)
    spacing = 2.0 * base
    rows = []
    for ell in range(lo, hi + 1):
        t_ell = base + ell * spacing
        for k in APPROACH_EXPONENTS:
            t = t_ell - abs(t_ell) * 10.0 ** (-k)
            log_mag = hyperbolic_xn_log10_magnitude(
                obs.n, config.alpha, params, t, guard=0.0
            )
            rows.append((ell, t_ell, k, t, log_mag))
    return TableResult(
        columns=("ell", "t_ell", "k", "t", "log10_abs_f"),
        rows=tuple(rows),
    )


# -- classical/quantum breakdown fits ---------------------------------------

@dataclass(frozen=True)
class EhrenfestFit:
    """Breakdown times per hbar with log and power-law fits.

    ``breakdown_times`` holds the absolute-deviation crossing ``|f - f_cl| >=
    threshold`` (None when not reached inside the window);
    ``relative_times`` the relative-deviation crossing.  The log fit is
    ``t* = intercept + slope * ln(1/hbar)``; the power fit is
    ``t* = power_coeff * (1/hbar)^power_exponent`` (fitted in log-log space).
    Fits are computed only when at least four crossings exist.
    """

    hbar_values: tuple[float, ...]
    breakdown_times: tuple["float | None", ...]
    relative_times: tuple["float | None", ...]
    threshold: float
    intercept: Optional[float] = None
    slope: Optional[float] = None
    goodness: Optional[float] = None
    power_coeff: Optional[float] = None
    power_exponent: Optional[float] = None
    power_goodness: Optional[float] = None


def _linear_fit(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    goodness = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return intercept, slope, goodness


def _first_crossing(deviation, grid: list[float], threshold: float, bisect_rel: float) -> Optional[float]:
    previous_t = None
    for t in grid:
        if deviation(t) >= threshold:
            if previous_t is None:
                return t
            lo, hi = previous_t, t
            width0 = hi - lo
            while (hi - lo) > bisect_rel * width0:
                mid = 0.5 * (lo + hi)
                if deviation(mid) >= threshold:
                    hi = mid
                else:
                    lo = mid
            return hi
        previous_t = t
    return None


def cmd_ehrenfest(config: RunConfig, hbar_list: "tuple[float, ...] | None" = None) -> tuple[EhrenfestFit, TableResult]:
    """Breakdown time of the classical description per hbar, with fits.

    For each hbar the first time where the quantum/classical gap of the mean
    position reaches ``breakdown_threshold`` is located by grid scan plus
    bisection (to ``bisect_rel`` of the bracketing interval).  Both the
    absolute-gap and relative-gap crossings are reported; fits of the
    absolute-gap times against ``ln(1/hbar)`` and in log-log space are
    emitted side by side.
    """
    hbars = tuple(hbar_list if hbar_list is not None else config.hbar_list)
    if not hbars:
        raise ConfigError("ehrenfest needs a nonempty hbar_list")
    grid = config.time_grid()
    threshold = config.breakdown_threshold
    abs_times: list[Optional[float]] = []
    rel_times: list[Optional[float]] = []
    rows = []
    for hbar in hbars:
        params = make_hyperbolic_params(config.omega, config.mu, hbar)

        def quantum(t: float) -> complex:
            return hyperbolic_xn_average(1, config.alpha, params, t, config.guard)

        def classical(t: float) -> complex:
            return hyperbolic_classical_xn(1, config.alpha, params, t)

        t_abs = _first_crossing(
            lambda t: abs(quantum(t) - classical(t)), grid, threshold, config.bisect_rel
        )
        t_rel = _first_crossing(
            lambda t: abs(quantum(t) - classical(t)) / (abs(classical(t)) + 1e-300),
            grid,
            threshold,
            config.bisect_rel,
        )
        abs_times.append(t_abs)
        rel_times.append(t_rel)
        status = "ok" if t_abs is not None else "breakdown-not-found"
        rows.append((hbar, t_abs, t_rel, status))

    found = [(h, t) for h, t in zip(hbars, abs_times) if t is not None]
    fit_kwargs: dict = {}
    if len(found) >= 4:
        xs = [math.log(1.0 / h) for h, _ in found]
        ys = [t for _, t in found]
        intercept, slope, goodness = _linear_fit(xs, ys)
        log_ys = [math.log(t) for _, t in found]
        pc, pe, pg = _linear_fit(xs, log_ys)
        fit_kwargs = dict(
            intercept=intercept,
            slope=slope,
            goodness=goodness,
            power_coeff=math.exp(pc),
            power_exponent=pe,
            power_goodness=pg,
        )
    fit = EhrenfestFit(
        hbar_values=hbars,
        breakdown_times=tuple(abs_times),
        relative_times=tuple(rel_times),
        threshold=threshold,
        **fit_kwargs,
    )
    meta = []
    for name in ("intercept", "slope", "goodness", "power_coeff", "power_exponent", "power_goodness"):
        value = getattr(fit, name)
        meta.append((f"fit_{name}", "none" if value is None else _fmt_float(value)))
    table = TableResult(
        columns=("hbar", "t_star_abs", "t_star_rel", "status"),
        rows=tuple(rows),
        extra_meta=tuple(meta),
    )
    return fit, table


def cmd_dispersion_regimes(config: RunConfig) -> TableResult:
    """Classify each grid time and compare exact vs approximate dispersion."""
    params = config.params
    params.require_hyperbolic()
    rows = []
    for t in config.time_grid():
        regime = classify_dispersion_regime(
            config.alpha, params, t, ratio=config.regime_ratio
        )
        label = regime.value if regime is not None else "none"
        try:
            exact = dispersion_exact(config.alpha, params, t, config.guard)
        except CollapseProximity:
            rows.append((t, label, None, None, None, None, None, 1))
            continue
        if regime is None:
            rows.append((t, label, exact.real, exact.imag, None, None, None, 0))
            continue
        try:
            approx = dispersion_approx(
                config.alpha, params, t, regime,
                slack=config.regime_slack, ratio=config.regime_ratio,
            )
        except OverflowError:
            # deep exponential regime: the displayed form leaves float range
            rows.append((t, label, exact.real, exact.imag, None, None, None, 0))
            continue
        gap = abs(approx - exact) / (abs(exact) + 1e-300)
        rows.append((t, label, exact.real, exact.imag, approx.real, approx.imag, gap, 0))
    return TableResult(
        columns=(
            "t",
            "regime",
            "re(D_exact)",
            "im(D_exact)",
            "re(D_approx)",
            "im(D_approx)",
            "rel_gap",
            "collapse_flag",
        ),
        rows=tuple(rows),
    )


# ---------------------------------------------------------------------------
# Deterministic writers
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    return format(float(x), ".16e")


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    return str(value)


def render_csv(result: TableResult, meta: list[tuple[str, str]]) -> str:
    lines = [f"# {key}={value}" for key, value in (*meta, *result.extra_meta)]
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt_cell(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    escaped = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render_json(result: TableResult, meta: list[tuple[str, str]]) -> str:
    """Hand-rolled serializer so float formatting matches the CSV exactly."""
    meta_items = ",".join(
        f'{_json_scalar(k)}:{_json_scalar(v)}' for k, v in (*meta, *result.extra_meta)
    )
    columns = ",".join(_json_scalar(c) for c in result.columns)
    rows = ",".join(
        "[" + ",".join(_json_scalar(cell) for cell in row) + "]" for row in result.rows
    )
    return (
        '{"meta":{' + meta_items + '},"columns":[' + columns + '],"rows":[' + rows + "]}\n"
    )


def render(result: TableResult, config: RunConfig, command: str) -> str:
    meta = config.metadata(command)
    if config.out_format == "json":
        return render_json(result, meta)
    return render_csv(result, meta)
