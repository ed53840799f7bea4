"""Run configurations, orchestration, and verification reports.

A run is described by one declarative config (a small YAML document or
an equivalent dict), built into theories, and verified; the outcome is
a plain JSON-serializable report with a fixed schema:

    config      echo of the normalized configuration
    checks      list of {name, residual, threshold, passed, note, ...}
    cohomology  degreewise dimension tables, one per built complex
    spectra     zero-momentum mass tables and the vacuum split
    conventions resolution notes collected from the builders
    pass        conjunction of every check

Reports are deterministic: a fixed seed is part of the config echo,
nothing carries a timestamp, and the structured emitter sorts its keys,
so identical configs produce byte-identical documents.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import json

from .gaugefix import build_dstar, symbol_order, verify_gaugefix
from .graded import (
    ConfigError, check_complex, cohomology_dims, conjugate_complex,
    verify_pairing_compat, verify_pairing_invariance, verify_retract,
)
from .invforms import build_invariant_model
from .lattice import build_lattice
from .liealg import named_algebra
from .linf import (
    brute_force_transfer, build_linf, cyclic_pairing, cyclicity_residual,
    homotopy_transfer, linf_residual,
)
from .theories import (
    build_broken, build_gl, build_interpolating, build_retract_maps,
    build_ym_pure, build_ymh, mass_spectrum, regroup_maps, sector_group,
)

F = Fraction

KINDS = ("gl", "ym", "ymh", "broken", "family", "gaugefix", "transfer")
TASKS = ("verify", "cohomology", "spectrum", "transfer", "gaugefix")
FAULTS = ("flip_scalar_corner",)

# symbol-order acceptance bands are part of the config, not constants
# baked in here; these are only the defaults for a bare sector entry
DEFAULT_BAND = (0.0, float("inf"))


@dataclass
class RunConfig:
    kind: str
    task: str = "verify"
    backend: str = "lattice"
    n: int = 2
    N: int = 4
    a: object = F(1)
    algebra: str = None
    weight: int = 1
    m: object = F(1)
    vacuum: list = None
    potential_sign: int = None
    t_values: list = None
    gauge_points: list = None
    gauge_xis: list = None
    sectors: dict = None
    cap: int = None
    mode: str = "rational"
    tolerance: float = 1e-9
    seed: int = 0
    fault: str = None
    out: str = None


def _scalar(x, mode, what):
    """One numeric input: exact in rational mode, float in float mode."""
    if isinstance(x, bool):
        raise ConfigError("%s must be a number" % what)
    if mode == "rational":
        if isinstance(x, float):
            raise ConfigError(
                "rational mode needs exact inputs, but %s is the float %r"
                % (what, x))
        try:
            return F(x)
        except (ValueError, ZeroDivisionError, TypeError):
            raise ConfigError("cannot read %s from %r" % (what, x))
    try:
        return float(F(x)) if isinstance(x, str) else float(x)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ConfigError("cannot read %s from %r" % (what, x))


def _point(entry, mode):
    """A family point from config: 's:t' text or a [s, t] pair."""
    if isinstance(entry, str) and ":" in entry:
        s, t = entry.split(":", 1)
        return (_scalar(s.strip(), mode, "gauge point"),
                _scalar(t.strip(), mode, "gauge point"))
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return tuple(_scalar(x, mode, "gauge point") for x in entry)
    raise ConfigError("gauge point %r is neither 's:t' nor a pair" % (entry,))


_TOP_KEYS = {"kind", "backend", "geometry", "algebra", "weight", "m",
             "vacuum", "potential_sign", "interpolation", "gauge_points",
             "gauge_xis", "sectors", "cap", "mode", "tolerance", "seed",
             "fault", "out"}


def load_config(source, task: str = "verify", **overrides) -> RunConfig:
    """Read and validate a run configuration.

    source is a mapping, or a path to a YAML file holding one.  Keyword
    overrides (mode, tolerance, seed, out) come last, matching the
    command-line flags.
    """
    if isinstance(source, (str, bytes)):
        import yaml
        try:
            with open(source) as fh:
                raw = yaml.safe_load(fh)
        except OSError as e:
            raise ConfigError("cannot read config: %s" % e)
        except yaml.YAMLError as e:
            raise ConfigError("config does not parse: %s" % e)
    else:
        raw = dict(source)
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("a config is a non-empty mapping of sections")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError("unknown config keys: %s"
                          % ", ".join(sorted(unknown)))
    for key in ("mode", "tolerance", "seed", "out"):
        if overrides.get(key) is not None:
            raw[key] = overrides[key]
    if task not in TASKS:
        raise ConfigError("unknown task %r" % (task,))
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError("theory kind must be one of %s, got %r"
                          % ("/".join(KINDS), kind))
    mode = raw.get("mode", "rational")
    if mode not in ("rational", "float"):
        raise ConfigError("numeric mode is rational or float, got %r"
                          % (mode,))
    backend = raw.get("backend", "lattice")
    if backend not in ("lattice", "invforms"):
        raise ConfigError("backend is lattice or invforms, got %r"
                          % (backend,))
    geo = raw.get("geometry", {})
    if not isinstance(geo, dict):
        raise ConfigError("geometry is a mapping with n, N, a")
    cfg = RunConfig(
        kind=kind, task=task, backend=backend,
        n=int(geo.get("n", 2)), N=int(geo.get("N", 4)),
        a=_scalar(geo.get("a", 1), mode, "lattice spacing"),
        algebra=raw.get("algebra"), weight=int(raw.get("weight", 1)),
        m=_scalar(raw.get("m", 1), mode, "m"),
        vacuum=None, potential_sign=raw.get("potential_sign"),
        t_values=None, gauge_points=None, gauge_xis=None,
        sectors=raw.get("sectors"), cap=raw.get("cap"),
        mode=mode, tolerance=float(raw.get("tolerance", 1e-9)),
        seed=int(raw.get("seed", 0)), fault=raw.get("fault"),
        out=raw.get("out"))
    if raw.get("vacuum") is not None:
        cfg.vacuum = [_scalar(x, mode, "vacuum coordinate")
                      for x in raw["vacuum"]]
    if raw.get("interpolation") is not None:
        cfg.t_values = [_scalar(x, mode, "interpolation value")
                        for x in raw["interpolation"]]
    if raw.get("gauge_points") is not None:
        cfg.gauge_points = [_point(x, mode) for x in raw["gauge_points"]]
    if raw.get("gauge_xis") is not None:
        cfg.gauge_xis = [_scalar(x, mode, "xi") for x in raw["gauge_xis"]]
    if cfg.fault is not None and cfg.fault not in FAULTS:
        raise ConfigError("unknown fault %r (have %s)"
                          % (cfg.fault, ", ".join(FAULTS)))
    if cfg.kind != "gl" and cfg.algebra is None:
        raise ConfigError("kind %r needs an algebra" % (cfg.kind,))
    if cfg.kind in ("ymh", "broken", "family", "gaugefix", "transfer") \
            and cfg.vacuum is None:
        raise ConfigError("kind %r needs vacuum coordinates" % (cfg.kind,))
    if cfg.sectors is not None and not isinstance(cfg.sectors, dict):
        raise ConfigError("sectors is a mapping sector -> {ray, low, high}")
    return cfg


def _num(x):
    """Config echo rendering: exact values as text, the rest as-is."""
    if isinstance(x, F):
        return str(x)
    return x


def _echo(cfg: RunConfig) -> dict:
    out = {
        "kind": cfg.kind, "task": cfg.task, "backend": cfg.backend,
        "geometry": {"n": cfg.n, "N": cfg.N, "a": _num(cfg.a)},
        "algebra": cfg.algebra, "weight": cfg.weight, "m": _num(cfg.m),
        "vacuum": None if cfg.vacuum is None
                  else [_num(x) for x in cfg.vacuum],
        "potential_sign": cfg.potential_sign,
        "interpolation": None if cfg.t_values is None
                         else [_num(x) for x in cfg.t_values],
        "gauge_points": None if cfg.gauge_points is None
                        else ["%s:%s" % (_num(s), _num(t))
                              for s, t in cfg.gauge_points],
        "gauge_xis": None if cfg.gauge_xis is None
                     else [_num(x) for x in cfg.gauge_xis],
        "sectors": cfg.sectors, "cap": cfg.cap, "mode": cfg.mode,
        "tolerance": cfg.tolerance, "seed": cfg.seed, "fault": cfg.fault,
    }
    return out


def _check(name, residual, threshold, note, witness=None):
    entry = {
        "name": name,
        "residual": float(residual),
        "threshold": float(threshold),
        "passed": bool(float(residual) <= float(threshold)),
        "note": note,
    }
    if witness is not None:
        entry["witness"] = witness
    return entry


def _dims(report) -> dict:
    return {str(k): v for k, v in sorted(report.dims.items())}


def _model(cfg: RunConfig):
    if cfg.backend == "lattice":
        return build_lattice(cfg.n, cfg.N, cfg.a)
    return build_invariant_model(cfg.n)


def _lie(cfg: RunConfig):
    return named_algebra(cfg.algebra, cfg.weight)


def _collect_conventions(label, meta, dest):
    for line in meta.get("conventions", ()):
        dest.append("%s: %s" % (label, line))
    search = meta.get("convention_search")
    if search:
        dest.append("%s: convention search unique=%s over %s"
                    % (label, search.get("unique"), search.get("family")))


class _Run:
    """One orchestration: accumulates checks and tables."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.checks = []
        self.cohomology = {}
        self.spectra = {}
        self.conventions = []

    def add(self, *args, **kw):
        self.checks.append(_check(*args, **kw))

    def report(self):
        return {
            "config": _echo(self.cfg),
            "checks": self.checks,
            "cohomology": self.cohomology,
            "spectra": self.spectra,
            "conventions": self.conventions,
            "pass": all(c["passed"] for c in self.checks),
        }

    # -- shared pieces -------------------------------------------------

    def square(self, label, theory):
        self.add("square_zero_%s" % label, check_complex(theory.complex),
                 0 if self.cfg.mode == "rational" else self.cfg.tolerance,
                 "the differential squares to zero on the %s complex"
                 % label)

    def table(self, label, theory):
        rep = cohomology_dims(theory.complex, mode=self.cfg.mode,
                              tolerance=self.cfg.tolerance)
        self.cohomology[label] = _dims(rep)
        return rep

    def vacuum_dims(self, theory):
        vac = theory.vacuum
        if vac is not None:
            self.spectra["vacuum_dims"] = {
                "dim_h": vac.dim_h, "dim_hperp": vac.dim_hperp,
                "dim_rperp": vac.dim_rperp}


def _ymh_theories(cfg):
    model = _model(cfg)
    lie = _lie(cfg)
    kw = {}
    if cfg.potential_sign is not None:
        kw["pot_sign"] = cfg.potential_sign
    coupled = build_ymh(model, lie, cfg.m, cfg.vacuum, **kw)
    unbroken = build_ymh(model, lie, cfg.m, [0] * len(cfg.vacuum), **kw)
    reduced = build_broken(model, lie, cfg.m, cfg.vacuum)
    return model, lie, coupled, unbroken, reduced


def _suite_ymh(run, with_gauge=True):
    cfg = run.cfg
    model, lie, coupled, unbroken, reduced = _ymh_theories(cfg)
    run.square("coupled", coupled)
    run.square("unbroken", unbroken)
    run.square("reduced", reduced)
    run.add("pairing_invariance",
            verify_pairing_invariance(coupled.complex, coupled.pairing),
            0 if cfg.mode == "rational" else cfg.tolerance,
            "the pairing intertwines the differential with itself")
    rep0 = run.table("unbroken", unbroken)
    rep1 = run.table("coupled", coupled)
    rep2 = run.table("reduced", reduced)
    run.vacuum_dims(coupled)
    g = lie.dim_g
    h = coupled.vacuum.dim_h
    run.add("ghost_cohomology_unbroken", abs(rep0.dim(-1) - g), 0,
            "every gauge direction stabilizes the symmetric point, so "
            "the ghost cohomology counts the whole algebra (%d)" % g)
    run.add("ghost_cohomology_broken", abs(rep1.dim(-1) - h), 0,
            "the ghost cohomology at the vacuum counts the stabilizer "
            "(%d)" % h)
    jump = max(abs(rep1.dim(k) - rep2.dim(k))
               for k in coupled.complex.space.degrees())
    run.add("quasi_isomorphism", jump, 0,
            "eliminating the eaten pair preserves every cohomology "
            "dimension")
    r = build_retract_maps(coupled)
    res = verify_retract(r)
    for key in ("chain_maps", "proj_incl", "homotopy", "homotopy_sq",
                "side_proj_h", "side_h_incl"):
        run.add("retract_%s" % key, res[key],
                0 if cfg.mode == "rational" else cfg.tolerance,
                "deformation retract law: %s" % key)
    rescale = dict(r.meta["pairing_rescale"])
    note = ("pairing transport through the retract, scalar factor %s"
            % rescale["scalar"])
    if cfg.fault == "flip_scalar_corner":
        rescale["scalar"] = -rescale["scalar"]
        note = ("injected fault: scalar transport factor flipped to %s"
                % rescale["scalar"])
    small = r.meta["small_theory"]
    compat = verify_pairing_compat(
        r, coupled.pairing, small.pairing, rescale,
        lambda d, i: sector_group(small.sector_of(d, i)))
    run.add("pairing_transport", compat,
            0 if cfg.mode == "rational" else cfg.tolerance, note)
    _collect_conventions("coupled", coupled.meta, run.conventions)
    _collect_conventions("reduced", reduced.meta, run.conventions)
    _mass_checks(run, reduced)
    if cfg.t_values:
        _suite_family(run, model, lie, reduced)
    if with_gauge and (cfg.gauge_points or cfg.gauge_xis):
        _suite_gaugefix(run, coupled)
    return coupled


def _mass_checks(run, reduced):
    # the clean multiplicity law needs the momentum decomposition, so
    # the scale assertions are lattice-only; tables are always reported
    cfg = run.cfg
    spec = mass_spectrum(reduced)
    run.spectra["reduced"] = {name: [list(pair) for pair in pairs]
                              for name, pairs in spec.items()}
    if cfg.backend != "lattice":
        return
    vac = reduced.vacuum
    mu = float(F(cfg.weight) * F(cfg.weight) * F(cfg.m) * F(cfg.m))
    gauge = spec.get("gauge_perp", [])
    want = reduced.model.n * vac.dim_hperp
    run.add("broken_gauge_multiplicity", abs(len(gauge) - want), 0,
            "one massive mode per spatial direction and broken "
            "generator (%d)" % want)
    worst = max((abs(m2 - mu) for m2, _ in gauge), default=0.0)
    run.add("broken_gauge_mass", worst, cfg.tolerance,
            "every zero-momentum eigenvalue of the broken gauge sector "
            "sits at (weight * m)^2 = %g" % mu)


def _suite_family(run, model, lie, reduced):
    cfg = run.cfg
    for t in cfg.t_values:
        fam = build_interpolating(model, lie, cfg.m, cfg.vacuum, t,
                                  validate=False)
        label = "family_t=%s" % _num(t)
        run.square(label, fam)
        if t == 1:
            base = build_ymh(model, lie, cfg.m, cfg.vacuum)
            g_maps, ginv_maps, _ = regroup_maps(base)
            reg = conjugate_complex(base.complex, g_maps, ginv_maps)
            diff = max((fam.complex.d.block(k) - reg.d.block(k)).max_abs()
                       for k in fam.complex.space.degrees())
            run.add("family_endpoint_coupled", diff,
                    0 if cfg.mode == "rational" else cfg.tolerance,
                    "at t = 1 the family is the regrouped coupled model, "
                    "block for block")
        if t == 0:
            rep = run.table(label, fam)
            repr_ = cohomology_dims(reduced.complex, mode=cfg.mode,
                                    tolerance=cfg.tolerance)
            jump = max(abs(rep.dim(k) - repr_.dim(k))
                       for k in fam.complex.space.degrees())
            run.add("family_endpoint_reduced", jump, 0,
                    "at t = 0 the family computes the reduced cohomology")


def _suite_gaugefix(run, coupled):
    cfg = run.cfg
    points = list(cfg.gauge_points or [])
    points.extend(cfg.gauge_xis or [])
    zero_mode = 0 if cfg.mode == "rational" else cfg.tolerance
    for point in points:
        gf = build_dstar(coupled, point, mode=cfg.mode,
                         tolerance=cfg.tolerance)
        label = "%s:%s" % tuple(_num(x) for x in gf.parameter) \
            if isinstance(point, tuple) else "xi=%s" % _num(point)
        rep = verify_gaugefix(coupled, gf, tolerance=cfg.tolerance)
        run.add("gaugefix_square_%s" % label, rep["square_residual"],
                zero_mode, "the slice operator squares to zero")
        mism = sum(1 for ok in rep["match"].values() if not ok)
        run.add("gaugefix_harmonic_%s" % label, mism, 0,
                "ker d meets ker D* in exactly the cohomology, degree "
                "by degree")
        if isinstance(point, tuple) and not point[0]:
            h = build_retract_maps(coupled).homotopy
            diff = max((gf.operator.block(k) - h.block(k)).max_abs()
                       for k in coupled.complex.space.degrees())
            run.add("gaugefix_contraction_end", diff, zero_mode,
                    "the (0 : 1) operator is the retract homotopy")
        run.cohomology.setdefault(
            "harmonic_%s" % label,
            {str(k): v for k, v in sorted(rep["harmonic_dims"].items())})
    conv = coupled.meta.get("gaugefix_conventions")
    if conv:
        run.conventions.append(
            "gaugefix: %s; selected %s" % (conv["family"],
                                           list(conv["selected"])))
    if cfg.sectors:
        gf = build_dstar(coupled, points[0] if points else (F(1), F(1)),
                         mode=cfg.mode, tolerance=cfg.tolerance)
        for name in sorted(cfg.sectors):
            entry = cfg.sectors[name] or {}
            ray = tuple(entry.get("ray", (1,) + (0,) * (cfg.n - 1)))
            low = float(entry.get("low", DEFAULT_BAND[0]))
            high = float(entry.get("high", DEFAULT_BAND[1]))
            slope = symbol_order(coupled, gf, name, ray, seed=cfg.seed)
            outside = max(0.0, low - slope, slope - high)
            run.add("symbol_order_%s" % name, outside, 0,
                    "fitted growth exponent %.6f against the band "
                    "[%g, %g]" % (slope, low, high))
            run.spectra.setdefault("symbol_slopes", {})[name] = slope


def _suite_gl(run):
    cfg = run.cfg
    th = build_gl(_model(cfg), cfg.m,
                  cfg.vacuum if cfg.vacuum is not None else [0, 0],
                  **({} if cfg.potential_sign is None
                     else {"pot_sign": cfg.potential_sign}))
    run.square("scalar", th)
    run.table("scalar", th)
    spec = mass_spectrum(th)["scalar"]
    run.spectra["scalar"] = {"scalar": [list(p) for p in spec]}
    if cfg.vacuum is not None and any(cfg.vacuum):
        dim_r = len(cfg.vacuum)
        zeros = sum(1 for _, raw in spec if abs(raw) <= cfg.tolerance)
        run.add("goldstone_count", abs(zeros - (dim_r - 1)), 0,
                "one massless direction per broken global generator "
                "(%d)" % (dim_r - 1))
        mu = float(F(cfg.m) * F(cfg.m))
        massive = [m2 for m2, raw in spec if abs(raw) > cfg.tolerance]
        run.add("radial_count", abs(len(massive) - 1), 0,
                "one massive direction, along the vacuum")
        worst = max((abs(m2 - mu) for m2 in massive), default=0.0)
        run.add("radial_mass", worst, cfg.tolerance,
                "the massive mode sits at m^2 = %g" % mu)
    return th


def _suite_transfer(run):
    cfg = run.cfg
    if cfg.backend != "invforms":
        raise ConfigError("the bracket battery runs on the invariant-"
                          "forms backend")
    model, lie, coupled, _, reduced = _ymh_theories(cfg)
    run.square("coupled", coupled)
    L = build_linf(coupled)
    for n in range(1, 2 * L.max_arity):
        res = linf_residual(L, n, seed=cfg.seed)
        run.add("bracket_relation_%d" % n, res.value,
                0 if cfg.mode == "rational" else cfg.tolerance,
                "multilinear relation at arity %d" % n,
                witness=None if res.witness is None else repr(res.witness))
    omega = cyclic_pairing(coupled)
    for a in L.arities:
        res = cyclicity_residual(L, omega, a, seed=cfg.seed)
        run.add("bracket_rotation_%d" % a, res.value,
                0 if cfg.mode == "rational" else cfg.tolerance,
                "rotation law at arity %d against the uniform "
                "orientation" % a,
                witness=None if res.witness is None else repr(res.witness))
    r = build_retract_maps(coupled)
    cap = cfg.cap or 4
    T = homotopy_transfer(L, r, cap=cap)
    # arity 1 of the transferred structure against the independently
    # assembled reduced differential, entry by entry
    worst = F(0)
    sp = r.small.space
    dsmall = reduced.complex.d
    for k in sp.degrees():
        blk = dsmall.block(k)
        for i in range(sp.dim(k)):
            vec = T.bracket(1, ((k, i),))
            for (kk, jj), v in vec.items():
                expect = blk.data.get((jj, i), F(0)) if kk == k + 1 else F(0)
                worst = max(worst, abs(v - expect))
            for (jj, ii), v in blk.data.items():
                if ii == i and (k + 1, jj) not in vec:
                    worst = max(worst, abs(v))
    run.add("transfer_linear_part", worst, 0,
            "the transferred arity-1 bracket is the reduced differential")
    for a in (2, 3):
        B = brute_force_transfer(L, r, a)
        worst = F(0)
        for key, vec in B.items():
            got = T.bracket(a, key)
            for lab in set(vec) | set(got):
                worst = max(worst,
                            abs(vec.get(lab, F(0)) - got.get(lab, F(0))))
        run.add("transfer_trees_%d" % a, worst, 0,
                "transferred arity %d agrees with the direct sum over "
                "trees" % a)
    for n in range(1, min(2 * T.max_arity - 1, 4) + 1):
        res = linf_residual(T, n, seed=cfg.seed)
        run.add("transfer_relation_%d" % n, res.value,
                0 if cfg.mode == "rational" else cfg.tolerance,
                "transferred structure satisfies the arity-%d relation"
                % n,
                witness=None if res.witness is None else repr(res.witness))
    for key, val in sorted(T.meta.get("side_conditions", {}).items()):
        run.add("transfer_%s" % key, val, 0,
                "retract side condition used by the transfer")
    run.table("coupled", coupled)
    run.table("reduced", reduced)
    return coupled


def run_config(cfg: RunConfig) -> dict:
    """Build what the config names, run its checks, return the report."""
    run = _Run(cfg)
    task = cfg.task
    if task == "transfer" or (task == "verify" and cfg.kind == "transfer"):
        _suite_transfer(run)
        return run.report()
    if task == "gaugefix" or (task == "verify" and cfg.kind == "gaugefix"):
        if not (cfg.gauge_points or cfg.gauge_xis or cfg.sectors):
            raise ConfigError("the gauge-fixing battery needs "
                              "gauge_points, gauge_xis, or sectors")
        kw = {} if cfg.potential_sign is None \
            else {"pot_sign": cfg.potential_sign}
        coupled = build_ymh(_model(cfg), _lie(cfg), cfg.m, cfg.vacuum,
                            **kw)
        run.square("coupled", coupled)
        run.vacuum_dims(coupled)
        _suite_gaugefix(run, coupled)
        return run.report()
    if cfg.kind == "gl":
        if task == "cohomology":
            th = build_gl(_model(cfg), cfg.m, cfg.vacuum or [0, 0])
            run.table("scalar", th)
        else:
            _suite_gl(run)
        return run.report()
    if cfg.kind == "ym":
        th = build_ym_pure(_model(cfg), _lie(cfg))
        run.square("gauge", th)
        run.table("gauge", th)
        return run.report()
    if cfg.kind == "broken":
        th = build_broken(_model(cfg), _lie(cfg), cfg.m, cfg.vacuum)
        run.square("reduced", th)
        run.table("reduced", th)
        if task in ("verify", "spectrum"):
            _mass_checks(run, th)
        return run.report()
    if cfg.kind == "family":
        if not cfg.t_values:
            raise ConfigError("kind family needs interpolation values")
        model, lie = _model(cfg), _lie(cfg)
        reduced = build_broken(model, lie, cfg.m, cfg.vacuum)
        _suite_family(run, model, lie, reduced)
        return run.report()
    # ymh
    if task == "cohomology":
        _, _, coupled, unbroken, reduced = _ymh_theories(cfg)
        rep0 = run.table("unbroken", unbroken)
        rep1 = run.table("coupled", coupled)
        run.table("reduced", reduced)
        g = _lie(cfg).dim_g
        run.add("ghost_cohomology_unbroken", abs(rep0.dim(-1) - g), 0,
                "ghost cohomology of the symmetric point counts the "
                "whole algebra (%d)" % g)
        run.add("ghost_cohomology_broken",
                abs(rep1.dim(-1) - coupled.vacuum.dim_h), 0,
                "ghost cohomology at the vacuum counts the stabilizer "
                "(%d)" % coupled.vacuum.dim_h)
        run.vacuum_dims(coupled)
        return run.report()
    if task == "spectrum":
        _, _, coupled, _, reduced = _ymh_theories(cfg)
        run.vacuum_dims(coupled)
        _mass_checks(run, reduced)
        return run.report()
    _suite_ymh(run)
    return run.report()


def emit_report(report: dict, format: str = "text") -> str:
    """Serialize a report.

    The text form is line-oriented and stable: one CHECK line per check,
    dimension and spectrum tables, the convention notes, and a final
    OVERALL line.  The structured form is a single JSON document with
    sorted keys; parsing it recovers the report exactly.
    """
    if format == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if format != "text":
        raise ConfigError("report format is text or json, got %r"
                          % (format,))
    lines = []
    for c in report["checks"]:
        line = "CHECK %s %g %g %s" % (
            c["name"], c["residual"], c["threshold"],
            "PASS" if c["passed"] else "FAIL")
        if not c["passed"] and c.get("witness"):
            line += " worst=%s" % c["witness"]
        lines.append(line)
    for label in sorted(report["cohomology"]):
        dims = report["cohomology"][label]
        cells = " ".join("%s:%s" % (k, dims[k])
                         for k in sorted(dims, key=int))
        lines.append("COHOMOLOGY %s %s" % (label, cells))
    for label in sorted(report["spectra"]):
        entry = report["spectra"][label]
        if label == "vacuum_dims":
            lines.append("VACUUM h:%(dim_h)d hperp:%(dim_hperp)d "
                         "rperp:%(dim_rperp)d" % entry)
        elif label == "symbol_slopes":
            for name in sorted(entry):
                lines.append("SLOPE %s %.6f" % (name, entry[name]))
        else:
            for sector in sorted(entry):
                vals = " ".join("%g" % m2 for m2, _ in entry[sector])
                lines.append("SPECTRUM %s/%s %s" % (label, sector, vals))
    for note in report["conventions"]:
        lines.append("NOTE %s" % note)
    lines.append("OVERALL %s" % ("PASS" if report["pass"] else "FAIL"))
    return "\n".join(lines) + "\n"
