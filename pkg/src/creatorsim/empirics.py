"""Feed-survey analysis: conditional favorite distributions and rank tests.

Works on user-supplied CSV files of tweet records (feed, genre, angriness,
favorites). Favorites are compared on the log scale via ln(1 + favorites),
which leaves every rank statistic untouched while keeping zero-favorite
tweets in the data. Angriness plays the role of the gaming coordinate and
favorites the role of quality.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats as sps

FEEDS = ("E", "C")
GENRES = ("P", "NP")
ANGRINESS_LEVELS = (0, 1, 2, 3, 4)
CSV_HEADER = ["feed", "genre", "angriness", "favorites"]


class RecordParseError(ValueError):
    """One or more malformed rows; carries (line_number, reason) pairs."""

    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        lines = "; ".join(f"line {ln}: {why}" for ln, why in problems[:20])
        extra = "" if len(problems) <= 20 else f" (+{len(problems) - 20} more)"
        super().__init__(f"malformed rows: {lines}{extra}")


class EmptyConditionalError(ValueError):
    """No records match the requested conditional."""


@dataclass(frozen=True)
class TweetRecord:
    feed: str
    genre: str
    angriness: int
    favorites: int

    def __post_init__(self) -> None:
        if self.feed not in FEEDS:
            raise ValueError(f"feed must be one of {FEEDS}, got {self.feed!r}")
        if self.genre not in GENRES:
            raise ValueError(f"genre must be one of {GENRES}, got {self.genre!r}")
        if self.angriness not in ANGRINESS_LEVELS:
            raise ValueError(f"angriness must be in 0..4, got {self.angriness!r}")
        if self.favorites < 0:
            raise ValueError(f"favorites must be >= 0, got {self.favorites!r}")


def load_records(path) -> list[TweetRecord]:
    """Parse a record CSV; malformed rows are rejected with line numbers."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RecordParseError([(1, "empty file, expected header "
                                        + ",".join(CSV_HEADER))])
        if [h.strip() for h in header] != CSV_HEADER:
            raise RecordParseError([(1, f"bad header {header!r}, expected "
                                        + ",".join(CSV_HEADER))])
        records: list[TweetRecord] = []
        problems: list[tuple[int, str]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != 4:
                    raise ValueError(f"expected 4 fields, got {len(row)}")
                records.append(TweetRecord(
                    feed=row[0].strip(),
                    genre=row[1].strip(),
                    angriness=int(row[2]),
                    favorites=int(row[3]),
                ))
            except ValueError as exc:
                problems.append((line_no, str(exc)))
    if problems:
        raise RecordParseError(problems)
    return records


class Ecdf:
    """Right-continuous empirical CDF of a nonempty sample."""

    def __init__(self, values: Iterable[float]):
        vals = np.sort(np.asarray(list(values), dtype=float))
        if len(vals) == 0:
            raise ValueError("empirical cdf needs at least one value")
        self.values = vals

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self.values, x, side="right") / len(self.values)
        return out if out.ndim else float(out)

    def step_points(self) -> tuple[np.ndarray, np.ndarray]:
        uniq = np.unique(self.values)
        return uniq, np.asarray(self(uniq), dtype=float)


def _match(records: Sequence[TweetRecord], feed: str,
           genres: Iterable[str]) -> list[TweetRecord]:
    genres = set(genres)
    if feed not in FEEDS:
        raise ValueError(f"feed must be one of {FEEDS}")
    if not genres or not genres.issubset(GENRES):
        raise ValueError(f"genres must be a nonempty subset of {GENRES}")
    return [r for r in records if r.feed == feed and r.genre in genres]


def log_favorites(records: Sequence[TweetRecord]) -> np.ndarray:
    return np.log1p(np.asarray([r.favorites for r in records], dtype=float))


def conditional_ecdf(records: Sequence[TweetRecord], a: int, feed: str,
                     genres: Iterable[str]) -> Ecdf:
    """ECDF of ln(1 + favorites) at one angriness level in one feed slice."""
    sub = [r for r in _match(records, feed, genres) if r.angriness == a]
    if not sub:
        raise EmptyConditionalError(
            f"no records with angriness={a}, feed={feed}, genres={sorted(set(genres))}")
    return Ecdf(log_favorites(sub))


@dataclass(frozen=True)
class DominanceResult:
    """Pairwise dominance fractions between angriness-conditional ECDFs.

    ``matrix[a, b]`` is the fraction of grid points where the level-a CDF
    lies at or below the level-b CDF; 1.0 means a dominates b on the grid.
    Levels with no data are flagged and their rows/columns are NaN.
    """

    matrix: np.ndarray
    missing_levels: tuple[int, ...]


def dominance_matrix(records: Sequence[TweetRecord], feed: str,
                     genres: Iterable[str],
                     grid: Sequence[float]) -> DominanceResult:
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    curves: dict[int, np.ndarray] = {}
    missing: list[int] = []
    for a in ANGRINESS_LEVELS:
        try:
            curves[a] = np.asarray(conditional_ecdf(records, a, feed, genres)(grid),
                                   dtype=float)
        except EmptyConditionalError:
            missing.append(a)
    k = len(ANGRINESS_LEVELS)
    matrix = np.full((k, k), np.nan)
    for a in ANGRINESS_LEVELS:
        for b in ANGRINESS_LEVELS:
            if a in curves and b in curves:
                matrix[a, b] = float(np.mean(curves[a] <= curves[b] + 1e-12))
    return DominanceResult(matrix=matrix, missing_levels=tuple(missing))


def _midranks(values: np.ndarray) -> np.ndarray:
    # average ranks over tie groups, 1-based
    return sps.rankdata(values, method="average")


@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p_value: float
    n: int


def spearman_rho(records: Sequence[TweetRecord], feed: str,
                 genres: Iterable[str]) -> SpearmanResult:
    """Rank correlation between angriness and favorites in a feed slice.

    Mid-rank tie handling, Pearson correlation of the ranks, and a
    one-sided (positive association) p-value from the t approximation with
    n - 2 degrees of freedom.
    """
    sub = _match(records, feed, genres)
    n = len(sub)
    if n < 3:
        raise ValueError(f"need at least 3 matching records, got {n}")
    a = np.asarray([r.angriness for r in sub], dtype=float)
    favs = np.asarray([r.favorites for r in sub], dtype=float)
    if np.all(a == a[0]) or np.all(favs == favs[0]):
        raise ValueError("rank correlation undefined: a coordinate has zero variance")
    ra, rl = _midranks(a), _midranks(favs)
    ra = ra - ra.mean()
    rl = rl - rl.mean()
    rho = float(np.dot(ra, rl) / math.sqrt(np.dot(ra, ra) * np.dot(rl, rl)))
    rho = max(-1.0, min(1.0, rho))
    if rho >= 1.0:
        p = 0.0
    elif rho <= -1.0:
        p = 1.0
    else:
        t_stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = float(sps.t.sf(t_stat, df=n - 2))
    return SpearmanResult(rho=rho, p_value=p, n=n)
