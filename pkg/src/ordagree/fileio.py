"""Rating-matrix CSV ingestion, study config files and atomic report writing.

Input CSV layout: a header row, one row per target, rater scores as
integers ``1..K``. An optional group column (``group`` by default) splits
targets into groups.

Study config files are flat ``key = value`` text; ``#`` starts a comment.
Recognized keys are listed in :data:`CONFIG_KEYS`.
"""
from __future__ import annotations

import configparser
import csv
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .index import DomainError, RatingMatrix
from .simulation import DEFAULT_P, PopulationSpec, StudyConfig, mix_to_dispersion

__all__ = [
    "ParseError",
    "ParsedRatings",
    "parse_matrix_csv",
    "parse_study_config",
    "atomic_write_text",
    "CONFIG_KEYS",
]

log = logging.getLogger(__name__)

CONFIG_KEYS = {
    "S": int,
    "B": int,
    "n_T": int,
    "n_R": int,
    "level": float,
    "methods": str,
    "schemes": str,
    "seed": int,
    "N_T": int,
    "N_R": int,
    "p": str,
    "target_d": float,
    "population_seed": int,
    "workers": int,
}


class ParseError(DomainError):
    """Malformed input file; the message carries file, row and column."""


@dataclass(frozen=True)
class ParsedRatings:
    matrix: RatingMatrix
    groups: np.ndarray | None
    rater_names: tuple
    K_inferred: bool

    def by_group(self) -> dict[str, RatingMatrix]:
        """Sub-matrices per group label, in order of first appearance."""
        if self.groups is None:
            return {}
        out = {}
        for label in dict.fromkeys(self.groups.tolist()):
            out[label] = RatingMatrix(self.matrix.cells[self.groups == label], self.matrix.K)
        return out


def parse_matrix_csv(path, K: int | None = None, group_column: str | None = "group",
                     transpose: bool = False) -> ParsedRatings:
    """Read and validate a targets-by-raters CSV.

    Parameters
    ----------
    path : path-like
        CSV file with a header row.
    K : int, optional
        Number of scale levels. When omitted it is inferred as the largest
        observed score and a warning is logged.
    group_column : str, optional
        Name of a label column splitting targets into groups; ignored if the
        header does not contain it.
    transpose : bool
        Treat rows as raters and columns as targets (no group column then).
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from exc
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if not body:
        raise ParseError(f"{path}: header only, no ratings")

    group_idx = header.index(group_column) if group_column and group_column in header else None
    if transpose and group_idx is not None:
        raise ParseError(f"{path}: a group column cannot be combined with transpose")
    score_cols = [j for j in range(len(header)) if j != group_idx]

    groups, values = [], []
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i} has {len(row)} fields, header has {len(header)}")
        if group_idx is not None:
            groups.append(row[group_idx].strip())
        parsed = []
        for j in score_cols:
            text = row[j].strip()
            try:
                parsed.append(int(text))
            except ValueError:
                raise ParseError(
                    f"{path}: row {i}, column {j + 1} ({header[j]!r}): {text!r} is not an integer"
                ) from None
        values.append(parsed)

    cells = np.array(values, dtype=np.int64)
    names = tuple(header[j] for j in score_cols)
    if transpose:
        cells = cells.T
    inferred = K is None
    if inferred:
        K = int(cells.max())
        log.warning("K not given; inferred K=%d from the largest score (unused top levels are missed)", K)
    bad = np.argwhere((cells < 1) | (cells > K))
    if bad.size:
        r, c = bad[0]
        if transpose:
            r, c = c, r
        raise ParseError(
            f"{path}: row {r + 2}, column {score_cols[c] + 1}: score {values[r][c]} outside 1..{K}"
        )
    return ParsedRatings(
        matrix=RatingMatrix(cells, K),
        groups=np.array(groups) if group_idx is not None else None,
        rater_names=names,
        K_inferred=inferred,
    )


def _split_list(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def parse_study_config(path) -> tuple[PopulationSpec, StudyConfig, int]:
    """Read a flat key-value study file into population spec, study config and worker count.

    Missing keys take the full-scale defaults. ``target_d`` shrinks ``p``
    toward its mode until the theoretical index matches it.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    parser.optionxform = str
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        parser.read_string("[study]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from None
    raw = dict(parser["study"])
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ParseError(f"{path}: unknown config keys {unknown}; allowed: {sorted(CONFIG_KEYS)}")
    vals = {}
    for key, text_value in raw.items():
        try:
            vals[key] = CONFIG_KEYS[key](text_value)
        except ValueError:
            raise ParseError(f"{path}: key {key!r}: cannot parse {text_value!r}") from None

    try:
        p = tuple(float(v) for v in _split_list(vals["p"])) if "p" in vals else DEFAULT_P
    except ValueError:
        raise ParseError(f"{path}: key 'p': expected comma-separated probabilities") from None
    if "target_d" in vals:
        p = tuple(mix_to_dispersion(p, vals["target_d"]).p)
    pop = PopulationSpec(
        N_T=vals.get("N_T", 150),
        N_R=vals.get("N_R", 28),
        p=p,
        seed=vals.get("population_seed", vals.get("seed", 0)),
    )
    study_kwargs = {k: vals[k] for k in ("S", "B", "n_T", "n_R", "level", "seed") if k in vals}
    for key in ("methods", "schemes"):
        if key in vals:
            study_kwargs[key] = _split_list(vals[key])
    return pop, StudyConfig(**study_kwargs), vals.get("workers", 1)


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        Path(tmp).unlink(missing_ok=True)
        raise OSError(f"{path}: write failed ({exc.strerror})") from exc
    return path
