"""Issue-space characterization, database generation, CSV persistence, splits.

A scenario ("issue point") is a malfunction/mitigation parameter tuple:
fractional torque loss on pump 1 over a fixed window, and a mitigation ramp of
pump 2 described by magnitude, start, and end. Databases hold one simulated
transient per issue point, each written to its own CSV plus a JSON manifest.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .plant import PlantParams, Simulator, Transient, TABLE_COLUMNS

MANIFEST_NAME = "manifest.json"
_FLOAT_FMT = "%.17g"


class ScenarioError(Exception):
    pass


class EmptySpace(ScenarioError):
    pass


class TooFew(ScenarioError):
    pass


@dataclass(frozen=True)
class ParamRule:
    """Sampling rule for one scenario parameter.

    kind: "fixed" (value), "grid" (count points over [lo, hi] inclusive),
    "choices" (explicit list), or "span" ([lo, hi], used by random sampling).
    """

    kind: str
    value: float | None = None
    lo: float | None = None
    hi: float | None = None
    count: int | None = None
    values: tuple[float, ...] | None = None

    @staticmethod
    def fixed(value: float) -> "ParamRule":
        return ParamRule("fixed", value=value)

    @staticmethod
    def grid(lo: float, hi: float, count: int) -> "ParamRule":
        return ParamRule("grid", lo=lo, hi=hi, count=count)

    @staticmethod
    def choices(values: Sequence[float]) -> "ParamRule":
        return ParamRule("choices", values=tuple(values))

    @staticmethod
    def span(lo: float, hi: float) -> "ParamRule":
        return ParamRule("span", lo=lo, hi=hi)

    def grid_samples(self) -> list[float]:
        if self.kind == "fixed":
            return [float(self.value)]
        if self.kind == "grid":
            if self.count < 1:
                raise EmptySpace("grid rule with zero samples")
            if self.count == 1:
                return [float(self.lo)]
            return [float(v) for v in np.linspace(self.lo, self.hi, self.count)]
        if self.kind == "choices":
            if not self.values:
                raise EmptySpace("empty choices rule")
            return [float(v) for v in self.values]
        if self.kind == "span":
            raise ScenarioError("span rule is only valid in random sampling mode")
        raise ScenarioError(f"unknown rule kind {self.kind}")

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "fixed":
            return float(self.value)
        if self.kind in ("grid", "span"):
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == "choices":
            return float(self.values[rng.integers(len(self.values))])
        raise ScenarioError(f"unknown rule kind {self.kind}")

    def bounds(self) -> tuple[float, float]:
        if self.kind == "fixed":
            return float(self.value), float(self.value)
        if self.kind in ("grid", "span"):
            return float(self.lo), float(self.hi)
        if not self.values:
            raise EmptySpace("empty choices rule")
        return min(self.values), max(self.values)

    def to_json(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if "values" in d:
            d["values"] = list(d["values"])
        return d

    @staticmethod
    def from_json(d: dict) -> "ParamRule":
        vals = tuple(d["values"]) if d.get("values") is not None else None
        return ParamRule(d["kind"], value=d.get("value"), lo=d.get("lo"),
                         hi=d.get("hi"), count=d.get("count"), values=vals)


@dataclass(frozen=True)
class IssueSpaceSpec:
    """Parameterized family of loss-of-flow scenarios.

    Mitigation end may be an absolute rule or an offset from the start
    (``mitigation_end_offset``); exactly one of the two must be provided.
    """

    malfunction_magnitude: ParamRule          # percent of nominal torque lost, 0..100
    mitigation_magnitude: ParamRule           # percent of nominal torque, 100..180
    mitigation_start: ParamRule               # s
    mitigation_end: ParamRule | None = None   # s, absolute
    mitigation_end_offset: float | None = None  # s after start
    malfunction_start: float = 10.0
    malfunction_end: float = 60.0
    horizon: float = 250.0
    sampling_mode: str = "grid"               # "grid" | "random"
    random_count: int | None = None

    def __post_init__(self):
        lo, hi = self.malfunction_magnitude.bounds()
        if lo < 0 or hi > 100:
            raise ScenarioError("malfunction magnitude must lie in [0, 100] %")
        lo, hi = self.mitigation_magnitude.bounds()
        if lo < 100 or hi > 180:
            raise ScenarioError("mitigation magnitude must lie in [100, 180] %")
        if self.malfunction_start >= self.malfunction_end:
            raise ScenarioError("malfunction window must have start < end")
        if (self.mitigation_end is None) == (self.mitigation_end_offset is None):
            raise ScenarioError("provide exactly one of mitigation_end / offset")
        if self.sampling_mode not in ("grid", "random"):
            raise ScenarioError("sampling_mode must be grid or random")
        if self.sampling_mode == "random" and not self.random_count:
            raise ScenarioError("random sampling requires random_count")

    def param_rules(self) -> dict[str, ParamRule]:
        rules = {
            "malfunction_magnitude_pct": self.malfunction_magnitude,
            "mitigation_magnitude_pct": self.mitigation_magnitude,
            "mitigation_start_s": self.mitigation_start,
        }
        if self.mitigation_end is not None:
            rules["mitigation_end_s"] = self.mitigation_end
        return rules

    def _finish(self, point: dict[str, float]) -> dict[str, float]:
        if self.mitigation_end_offset is not None:
            point["mitigation_end_s"] = point["mitigation_start_s"] + self.mitigation_end_offset
        if point["mitigation_start_s"] >= point["mitigation_end_s"]:
            raise ScenarioError("mitigation window must have start < end")
        return point

    def to_json(self) -> dict:
        d = {
            "malfunction_magnitude": self.malfunction_magnitude.to_json(),
            "mitigation_magnitude": self.mitigation_magnitude.to_json(),
            "mitigation_start": self.mitigation_start.to_json(),
            "malfunction_start": self.malfunction_start,
            "malfunction_end": self.malfunction_end,
            "horizon": self.horizon,
            "sampling_mode": self.sampling_mode,
        }
        if self.mitigation_end is not None:
            d["mitigation_end"] = self.mitigation_end.to_json()
        if self.mitigation_end_offset is not None:
            d["mitigation_end_offset"] = self.mitigation_end_offset
        if self.random_count is not None:
            d["random_count"] = self.random_count
        return d

    @staticmethod
    def from_json(d: dict) -> "IssueSpaceSpec":
        return IssueSpaceSpec(
            malfunction_magnitude=ParamRule.from_json(d["malfunction_magnitude"]),
            mitigation_magnitude=ParamRule.from_json(d["mitigation_magnitude"]),
            mitigation_start=ParamRule.from_json(d["mitigation_start"]),
            mitigation_end=(ParamRule.from_json(d["mitigation_end"])
                            if "mitigation_end" in d else None),
            mitigation_end_offset=d.get("mitigation_end_offset"),
            malfunction_start=d.get("malfunction_start", 10.0),
            malfunction_end=d.get("malfunction_end", 60.0),
            horizon=d.get("horizon", 250.0),
            sampling_mode=d.get("sampling_mode", "grid"),
            random_count=d.get("random_count"),
        )


def sample_issue_space(spec: IssueSpaceSpec, seed: int = 0) -> list[dict[str, float]]:
    """Issue points: Cartesian grid, or independent uniform draws per rule."""
    rules = spec.param_rules()
    if spec.sampling_mode == "grid":
        lists = {name: rule.grid_samples() for name, rule in rules.items()}
        for name, vals in lists.items():
            if not vals:
                raise EmptySpace(f"no samples for {name}")
        points: list[dict[str, float]] = [{}]
        for name, vals in lists.items():
            points = [dict(p, **{name: v}) for p in points for v in vals]
        return [spec._finish(p) for p in points]
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(spec.random_count):
        p = {name: rule.draw(rng) for name, rule in rules.items()}
        points.append(spec._finish(p))
    return points


def ramp_fn(t0: float, t1: float, v0: float, v1: float):
    """Piecewise-linear value: v0 before t0, ramp to v1 by t1, flat after."""
    dt = t1 - t0
    def f(t: float) -> float:
        if t < t0:
            return v0
        if t >= t1:
            return v1
        return v0 + (v1 - v0) * (t - t0) / dt
    return f


def point_schedules(point: dict[str, float], spec: IssueSpaceSpec, tau0: float):
    """Torque functions (pump 1, pump 2) realizing one issue point."""
    mal = ramp_fn(spec.malfunction_start, spec.malfunction_end,
                  tau0, tau0 * (1.0 - point["malfunction_magnitude_pct"] / 100.0))
    mit = ramp_fn(point["mitigation_start_s"], point["mitigation_end_s"],
                  tau0, tau0 * point["mitigation_magnitude_pct"] / 100.0)
    return mal, mit


@dataclass
class Database:
    spec: IssueSpaceSpec
    transients: list[Transient]
    provenance: dict

    def __len__(self) -> int:
        return len(self.transients)

    def feature_matrix(self, names: Sequence[str]) -> np.ndarray:
        """Stacked (n_transients, n_steps, n_features) tensor."""
        return np.stack([tr.column_matrix(names) for tr in self.transients])

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        entries = []
        for tr in self.transients:
            fname = f"{tr.scenario_id}.csv"
            write_transient_csv(out / fname, tr)
            entries.append({"scenario_id": tr.scenario_id, "file": fname,
                            "issue_point": tr.issue_point, "seed": tr.seed})
        manifest = {
            "schema_version": 1,
            "spec": self.spec.to_json(),
            "provenance": self.provenance,
            "transients": entries,
        }
        (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1))
        return out

    @staticmethod
    def load(path: str | Path) -> "Database":
        path = Path(path)
        manifest = json.loads((path / MANIFEST_NAME).read_text())
        transients = []
        for e in manifest["transients"]:
            tr = read_transient_csv(path / e["file"])
            tr.scenario_id = e["scenario_id"]
            tr.issue_point = e["issue_point"]
            tr.seed = e["seed"]
            transients.append(tr)
        return Database(spec=IssueSpaceSpec.from_json(manifest["spec"]),
                        transients=transients, provenance=manifest["provenance"])


def write_transient_csv(path: Path, tr: Transient) -> None:
    header = "time_s," + ",".join(TABLE_COLUMNS)
    mat = np.column_stack([tr.time] + [tr.columns[c] for c in TABLE_COLUMNS])
    lines = [header]
    for row in mat:
        lines.append(",".join(_FLOAT_FMT % v for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_transient_csv(path: Path) -> Transient:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",")
    if data.ndim == 1:
        data = data[None, :]
    cols = {name: data[:, i].copy() for i, name in enumerate(header) if name != "time_s"}
    return Transient(scenario_id=path.stem, issue_point={}, seed=None,
                     time=data[:, 0].copy(), columns=cols)


def params_fingerprint(params: PlantParams) -> str:
    payload = json.dumps(asdict(params), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def generate_database(spec: IssueSpaceSpec, plant_params: PlantParams | None = None,
                      seed: int = 0, parallelism: int = 1,
                      chunk_size: int = 256) -> Database:
    """Run one transient per issue point.

    Scenarios are integrated in lockstep chunks of fixed size; chunk layout
    does not depend on ``parallelism``, so results are identical for any
    worker count.
    """
    plant_params = plant_params or PlantParams()
    points = sample_issue_space(spec, seed)
    sim = Simulator(plant_params)
    tau0 = plant_params.nominal_torque
    width = max(4, len(str(len(points) - 1)))

    chunks = [(start, points[start:start + chunk_size])
              for start in range(0, len(points), chunk_size)]

    def run_chunk(arg):
        start, pts = arg
        fns = [point_schedules(p, spec, tau0) for p in pts]
        try:
            rows = sim.run_batch([f[0] for f in fns], [f[1] for f in fns],
                                 t_end=spec.horizon)
        except Exception as exc:  # record per-chunk failure, keep going
            return start, pts, exc
        return start, pts, rows

    results: dict[int, tuple] = {}
    if parallelism > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            for start, pts, rows in pool.map(run_chunk, chunks):
                results[start] = (pts, rows)
    else:
        for ch in chunks:
            start, pts, rows = run_chunk(ch)
            results[start] = (pts, rows)

    transients: list[Transient] = []
    failures = 0
    for start in sorted(results):
        pts, rows = results[start]
        if isinstance(rows, Exception):
            failures += len(pts)
            warnings.warn(f"chunk at {start} failed: {rows}")
            continue
        for k, (p, (times, cols)) in enumerate(zip(pts, rows)):
            sid = f"scn_{start + k:0{width}d}"
            transients.append(Transient(scenario_id=sid, issue_point=p, seed=seed,
                                        time=times, columns=cols))
    if failures > 0.01 * len(points):
        raise ScenarioError(f"{failures}/{len(points)} transients failed")
    provenance = {"plant_params_hash": params_fingerprint(plant_params),
                  "generation_seed": seed}
    return Database(spec=spec, transients=transients, provenance=provenance)


def split_database(db: Database, fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
                   seed: int = 0) -> tuple[Database, Database, Database]:
    """Partition whole transients into train/validation/test."""
    if any(f <= 0 for f in fractions):
        raise TooFew("all split fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ScenarioError("fractions must sum to 1")
    n = len(db.transients)
    idx = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    n_train = min(n_train, n - 2)
    if n_train < 1 or n_val < 1 or n - n_train - n_val < 1:
        raise TooFew(f"cannot split {n} transients into non-empty {fractions}")
    groups = (idx[:n_train], idx[n_train:n_train + n_val], idx[n_train + n_val:])
    out = []
    for g in groups:
        out.append(Database(spec=db.spec,
                            transients=[db.transients[i] for i in sorted(g)],
                            provenance=dict(db.provenance)))
    return tuple(out)
