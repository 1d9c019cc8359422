"""Grid scans of the (lambda, lambda_z, t_z) box against the channel predicates."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .attainability import class_cp_margin, class_l_margin, class_l_rotated_margin
from .channel import cp_margin, polyhedron_margin, positive_margin
from .errors import ConfigError
from .verdict import CODE_NAMES, EPS, status_codes

SCHEMA = "phasecov/1"

PREDICATES = {
    "cp": cp_margin,
    "positive": positive_margin,
    "polyhedron": polyhedron_margin,
    "class_l": class_l_margin,
    "class_l_rotated": class_l_rotated_margin,
    "class_cp": class_cp_margin,
}

# (inner, outer): every grid point satisfying inner must satisfy outer
CONTAINMENTS = (
    ("polyhedron", "cp"),
    ("cp", "positive"),
    ("class_l", "class_l_rotated"),
    ("class_l_rotated", "cp"),
    ("class_l", "class_cp"),
)

AXES = ("lambda", "lambda_z", "t_z")

# fixed drawing order and palette for SVG slices, outermost body first
PALETTE = {
    "positive": "#9ecae1",
    "class_cp": "#c6dbef",
    "cp": "#3182bd",
    "class_l_rotated": "#6baed6",
    "polyhedron": "#fd8d3c",
    "class_l": "#de2d26",
}


@dataclass
class AxisRange:
    min: float = -1.5
    max: float = 1.5
    steps: int = 101

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass
class ScanConfig:
    lam: AxisRange = field(default_factory=AxisRange)
    lambda_z: AxisRange = field(default_factory=AxisRange)
    t_z: AxisRange = field(default_factory=AxisRange)
    predicates: tuple = ("cp", "positive", "polyhedron")
    tol: float = EPS
    slices: tuple = (0.0,)
    threads: int = 1

    def validate(self) -> "ScanConfig":
        for name, ax in zip(AXES, (self.lam, self.lambda_z, self.t_z)):
            if not (math.isfinite(ax.min) and math.isfinite(ax.max)):
                raise ConfigError(f"{name}: range must be finite", field=f"{name}.min/max")
            if int(ax.steps) != ax.steps or ax.steps < 1:
                raise ConfigError(f"{name}: steps must be a positive integer", field=f"{name}.steps")
            # a single step is allowed only for a degenerate (point) axis
            if ax.steps == 1 and ax.min != ax.max:
                raise ConfigError(f"{name}: steps must be >= 2 for a non-degenerate range", field=f"{name}.steps")
            if ax.max < ax.min:
                raise ConfigError(f"{name}: max < min", field=f"{name}.max")
        unknown = [p for p in self.predicates if p not in PREDICATES]
        if unknown or not self.predicates:
            raise ConfigError(f"unknown or empty predicates {unknown}; choose from {sorted(PREDICATES)}",
                              field="predicates")
        if not (self.tol >= 0 and math.isfinite(self.tol)):
            raise ConfigError("tol must be finite and non-negative", field="tol")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1", field="threads")
        return self

    def to_dict(self) -> dict:
        out = asdict(self)
        out["predicates"] = list(self.predicates)
        out["slices"] = list(self.slices)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        data = dict(data)
        known = {"lam", "lambda_z", "t_z", "predicates", "tol", "slices", "threads"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown scan config keys {sorted(extra)}", field=sorted(extra)[0])
        kwargs = {}
        for key in ("lam", "lambda_z", "t_z"):
            if key in data:
                try:
                    kwargs[key] = AxisRange(**data[key])
                except TypeError as exc:
                    raise ConfigError(f"{key}: {exc}", field=key) from None
        for key in ("predicates", "slices"):
            if key in data:
                kwargs[key] = tuple(data[key])
        if "tol" in data:
            kwargs["tol"] = float(data["tol"])
        if "threads" in data:
            kwargs["threads"] = int(data["threads"])
        return cls(**kwargs).validate()


@dataclass
class ScanResult:
    axes: tuple
    margins: dict
    codes: dict
    config: ScanConfig

    @property
    def shape(self) -> tuple:
        return tuple(len(a) for a in self.axes)

    def counts(self) -> dict:
        return {p: {CODE_NAMES[c]: int(np.count_nonzero(codes == c)) for c in (1, 0, -1)}
                for p, codes in self.codes.items()}

    def containment_violations(self) -> dict:
        """Points satisfying the inner predicate while the outer one fails."""
        out = {}
        for inner, outer in CONTAINMENTS:
            if inner in self.codes and outer in self.codes:
                out[f"{inner}<={outer}"] = int(np.count_nonzero((self.codes[inner] >= 0) & (self.codes[outer] < 0)))
        return out

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": self.config.to_dict(),
            "axes": {name: [float(v) for v in ax] for name, ax in zip(AXES, self.axes)},
            "counts": self.counts(),
            "containment_violations": self.containment_violations(),
            "status": {p: [CODE_NAMES[int(c)] for c in codes.ravel()] for p, codes in self.codes.items()},
        }


def scan_region(cfg: ScanConfig) -> ScanResult:
    """Evaluate every requested predicate on the full grid.

    Work is split along the ``lambda`` axis across ``cfg.threads`` workers;
    chunks are reassembled in grid order, so the output does not depend on
    scheduling.
    """
    cfg.validate()
    axes = (cfg.lam.values(), cfg.lambda_z.values(), cfg.t_z.values())
    lam_chunks = np.array_split(axes[0], min(cfg.threads * 4, len(axes[0])))

    def work(chunk):
        lam, lz, tz = np.meshgrid(chunk, axes[1], axes[2], indexing="ij")
        return {p: PREDICATES[p](lam, lz, tz) for p in cfg.predicates}

    if cfg.threads == 1:
        parts = [work(c) for c in lam_chunks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(work, lam_chunks))
    margins = {p: np.concatenate([part[p] for part in parts], axis=0) for p in cfg.predicates}
    codes = {p: status_codes(m, cfg.tol) for p, m in margins.items()}
    return ScanResult(axes, margins, codes, cfg)


def write_csv(result: ScanResult, stream) -> None:
    preds = list(result.codes)
    columns = list(AXES) + preds
    stream.write(f"# {SCHEMA} region columns={','.join(columns)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    lam, lz, tz = np.meshgrid(*result.axes, indexing="ij")
    flat_codes = [result.codes[p].ravel() for p in preds]
    coords = [repr(float(v)) for v in lam.ravel()], [repr(float(v)) for v in lz.ravel()], \
        [repr(float(v)) for v in tz.ravel()]
    names = [[CODE_NAMES[int(c)] for c in codes] for codes in flat_codes]
    writer.writerows(zip(*coords, *names))


def csv_text(result: ScanResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def write_svg(result: ScanResult, path) -> None:
    """One panel per requested ``t_z`` slice (nearest grid value), bodies shaded."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = SCHEMA
    matplotlib.rcParams["svg.fonttype"] = "none"
    lam_ax, lz_ax, tz_ax = result.axes
    slices = list(result.config.slices) or [0.0]
    fig, axs = plt.subplots(1, len(slices), figsize=(4.2 * len(slices), 4.2), squeeze=False)
    order = [p for p in PALETTE if p in result.codes]
    for ax, tz in zip(axs[0], slices):
        k = int(np.argmin(np.abs(tz_ax - tz)))
        lam, lz = np.meshgrid(lam_ax, lz_ax, indexing="ij")
        for p in order:
            inside = result.codes[p][:, :, k] >= 0
            ax.scatter(lam[inside], lz[inside], s=4, marker="s", linewidths=0, color=PALETTE[p], label=p)
        ax.set_title(f"t_z = {tz_ax[k]:.3g}")
        ax.set_xlabel("lambda")
        ax.set_ylabel("lambda_z")
        ax.set_xlim(lam_ax[0], lam_ax[-1])
        ax.set_ylim(lz_ax[0], lz_ax[-1])
        ax.set_aspect("equal")
    axs[0][0].legend(loc="lower left", fontsize=7, markerscale=3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
