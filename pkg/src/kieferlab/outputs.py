"""Persistence: atomic CSV/JSON writers, manifests, content hashes.

All writes go through a temp-file-plus-rename so partially written files
never appear under the output directory.  CSV numbers are rendered with
Python's shortest round-trip float representation (period decimal
separator, no locale dependence).  Statistics files contain no timestamps,
so a rerun with the same master seed reproduces them byte for byte; the
manifest carries the volatile fields (wall time) alongside a content hash
of every CSV.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .experiments import ExperimentReport
from .transport import CouplingReport

__all__ = [
    "format_value",
    "atomic_write_text",
    "write_csv",
    "write_json",
    "sha256_file",
    "prepare_outdir",
    "write_manifest",
    "field_rows",
    "kiefer_rows",
    "lambda_rows",
    "coupling_rows",
    "beta_rows",
    "report_rows",
    "report_payload",
    "write_report",
]

MANIFEST_NAME = "manifest.json"


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows) -> None:
    """Single header row, then data rows; round-trip float formatting."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def prepare_outdir(outdir, overwrite: bool = False) -> Path:
    """Create (or reuse with --overwrite) the output directory.

    Refuses a directory holding a previous run's manifest unless
    overwrite is set, and proves writability before any computation by
    touching a probe file.
    """
    out = Path(outdir)
    if (out / MANIFEST_NAME).exists() and not overwrite:
        raise FileExistsError(
            f"{out} already holds a run (found {MANIFEST_NAME}); pass --overwrite to replace it"
        )
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-probe"
    try:
        probe.write_text("")
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    finally:
        if probe.exists():
            probe.unlink()
    return out


def _versions() -> dict:
    import numba
    import scipy

    from . import __version__

    return {
        "kieferlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def write_manifest(
    outdir: Path,
    master_seed: int,
    config_echo: dict | str,
    wall_time: float,
    extra: dict | None = None,
) -> Path:
    """Manifest with config echo, seed, versions, wall time, CSV hashes."""
    outdir = Path(outdir)
    hashes = {
        p.name: sha256_file(p) for p in sorted(outdir.glob("*.csv"))
    }
    payload = {
        "master_seed": int(master_seed),
        "config": config_echo,
        "versions": _versions(),
        "wall_time_seconds": wall_time,
        "csv_sha256": hashes,
    }
    if extra:
        payload.update(extra)
    path = outdir / MANIFEST_NAME
    write_json(path, payload)
    return path


# ---------------------------------------------------------------------------
# Row builders for the documented CSV interfaces.


def field_rows(field):
    """EmpiricalField -> (s, t, R) rows."""
    for j, s in enumerate(field.grid.points):
        for k, t in enumerate(field.times):
            yield (s, int(t), field.values[j, k])


def kiefer_rows(path):
    """KieferPath -> (s, t, K) rows."""
    for j, s in enumerate(path.grid.points):
        for k, t in enumerate(path.times):
            yield (s, int(t), path.values[j, k])


def lambda_rows(lam):
    """LambdaEstimate -> matrix rows with a grid header column."""
    for j, s in enumerate(lam.grid.points):
        yield (s, *lam.matrix[j])


def coupling_rows(reports: list[CouplingReport]):
    for rep in reports:
        s = rep.schedule
        yield (
            s.L,
            s.r,
            s.m,
            rep.sample_size,
            rep.w1,
            rep.w1_normalized,
            rep.control_lo,
            rep.control_hi,
        )


def beta_rows(estimates, floors):
    for est, floor in zip(estimates, floors):
        yield (est.lag, est.value, floor, est.pairs)


def report_rows(report: ExperimentReport):
    for row in report.statistics:
        yield (row.name, row.value, row.se, row.target, row.band_lo, row.band_hi)


def report_payload(report: ExperimentReport) -> dict:
    """JSON schema: name, params, statistics[], pass[].

    Wall time is deliberately excluded (it lives in the manifest): report
    files are bit-identical across reruns with the same master seed.
    """
    return {
        "name": report.name,
        "params": report.parameters,
        "statistics": [row.as_dict() for row in report.statistics],
        "pass": [[name, bool(ok)] for name, ok in report.checks],
        "seed": report.seed,
    }


def write_report(outdir: Path, stem: str, report: ExperimentReport) -> list[Path]:
    csv_path = Path(outdir) / f"{stem}.csv"
    json_path = Path(outdir) / f"{stem}.json"
    write_csv(
        csv_path,
        ["statistic", "value", "se", "target", "band_lo", "band_hi"],
        report_rows(report),
    )
    write_json(json_path, report_payload(report))
    return [csv_path, json_path]
