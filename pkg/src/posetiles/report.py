"""Figure and table rendering for certificates and plans.

Each artifact gets a PNG figure plus a CSV with the underlying numbers,
written side by side into the output directory.
"""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .config import Budgets, DEFAULT_BUDGETS
from .engine import GeneralResult, PartitionCertificate
from .errors import ValidationError
from .posets import LatticeCertificate, elems_of, level
from .weights import WeakCertificate, level_profile, multiplicity


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _save_fig(fig, path: Path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _render_weak(cert: WeakCertificate, out: Path, stem: str) -> list[Path]:
    if cert.kind == "r-partition":
        profile = level_profile(cert.weights, cert.n)
        rows = []
        for i in range(cert.n + 1):
            target = math.comb(cert.n, i)
            v = Fraction(profile[i])
            rows.append([i, v.numerator, v.denominator, target, v == target])
        csv_path = out / f"{stem}_levels.csv"
        _write_csv(csv_path, ["level", "total_num", "total_den", "target", "match"], rows)

        fig, ax = plt.subplots(figsize=(7, 4))
        xs = list(range(cert.n + 1))
        ax.bar(xs, [float(profile[i]) for i in xs], label="level total", alpha=0.7)
        ax.plot(xs, [math.comb(cert.n, i) for i in xs], "k.--", label="binomial target")
        if cert.n > 8:
            ax.set_yscale("log")
        ax.set_xlabel("level")
        ax.set_ylabel("multiplicity total")
        ax.set_title(f"r-partition level profile, n={cert.n}")
        ax.legend()
        png_path = out / f"{stem}_levels.png"
        _save_fig(fig, png_path)
        return [csv_path, png_path]

    rows = []
    counts: dict = {}
    for x in range(1 << cert.n):
        m = multiplicity(cert.weights, x)
        rows.append([list(elems_of(x)), m, m % cert.r, m % cert.r == 1 % cert.r])
        counts[m] = counts.get(m, 0) + 1
    csv_path = out / f"{stem}_multiplicities.csv"
    _write_csv(csv_path, ["element", "multiplicity", "residue", "ok"], rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    keys = sorted(counts)
    ax.bar([str(k) for k in keys], [counts[k] for k in keys])
    ax.set_xlabel("multiplicity of reduced weights")
    ax.set_ylabel("elements")
    ax.set_title(f"mod-partition multiplicities, n={cert.n}, r={cert.r}")
    png_path = out / f"{stem}_multiplicities.png"
    _save_fig(fig, png_path)
    return [csv_path, png_path]


def _render_tiles(cert: PartitionCertificate, out: Path, stem: str) -> list[Path]:
    rows = [
        [t.member, t.host, ";".join(f"{c}={v}" for c, v in t.fixed)]
        for t in cert.tiles
    ]
    csv_path = out / f"{stem}_tiles.csv"
    _write_csv(csv_path, ["member", "host", "fixed"], rows)

    counts: dict = {}
    for t in cert.tiles:
        counts[t.member] = counts.get(t.member, 0) + 1
    fig, ax = plt.subplots(figsize=(7, 4))
    keys = sorted(counts)
    ax.bar(keys, [counts[k] for k in keys])
    ax.set_xlabel("member")
    ax.set_ylabel("tiles")
    ax.set_title(
        f"tile counts by member, dimension {cert.dimension}, "
        f"{cert.cell_count()} cells"
    )
    png_path = out / f"{stem}_tiles.png"
    _save_fig(fig, png_path)
    return [csv_path, png_path]


def _render_lattice(cert: LatticeCertificate, out: Path, stem: str) -> list[Path]:
    rows = [
        [idx, [list(elems_of(m)) for m in tile]]
        for idx, tile in enumerate(cert.tiles)
    ]
    csv_path = out / f"{stem}_copies.csv"
    _write_csv(csv_path, ["tile", "elements"], rows)

    counts: dict = {}
    for tile in cert.tiles:
        top = max(level(m) for m in tile)
        counts[top] = counts.get(top, 0) + 1
    fig, ax = plt.subplots(figsize=(7, 4))
    keys = sorted(counts)
    ax.bar(keys, [counts[k] for k in keys])
    ax.set_xlabel("level of a copy's maximum")
    ax.set_ylabel("copies")
    ax.set_title(f"copies of |P|={len(cert.poset)} partitioning B({cert.dimension})")
    png_path = out / f"{stem}_copies.png"
    _save_fig(fig, png_path)
    return [csv_path, png_path]


def _render_plan(result: GeneralResult, out: Path, stem: str) -> list[Path]:
    rows = [
        [s.index, s.p, s.q, s.next_cover_id, len(s.main_certificate.tiles)]
        for s in result.stages
    ]
    csv_path = out / f"{stem}_plan.csv"
    _write_csv(csv_path, ["stage", "p", "q", "cover_member", "stage_tiles"], rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    stages = [s.index for s in result.stages]
    ax.bar([str(i) for i in stages], [s.p for s in result.stages])
    ax.set_yscale("log")
    ax.set_xlabel("stage")
    ax.set_ylabel("power of S covered")
    ax.set_title(f"plan-only dimension schedule, final n={result.n}")
    png_path = out / f"{stem}_plan.png"
    _save_fig(fig, png_path)
    return [csv_path, png_path]


def render_report(artifact, out_dir, budgets: Budgets = DEFAULT_BUDGETS) -> list[Path]:
    """Render the figure and CSV pair for a loaded artifact."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(artifact, WeakCertificate):
        return _render_weak(artifact, out, f"weak_{artifact.kind.split('-')[0]}")
    if isinstance(artifact, PartitionCertificate):
        return _render_tiles(artifact, out, "tilecert")
    if isinstance(artifact, LatticeCertificate):
        return _render_lattice(artifact, out, "lattice")
    if isinstance(artifact, GeneralResult):
        return _render_plan(artifact, out, "general")
    raise ValidationError(
        f"no report renderer for {type(artifact).__name__} artifacts"
    )
