"""
Per-step experiment log rows and their CSV form.
"""
import csv
import io
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional

from ..exceptions import AggregationError

SCHEMA_VERSION = "run_log/1"
PHASE_INIT = "init"
PHASE_CHILD = "child"


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


@dataclass(frozen=True)
class RunRecord:
    """One evaluated candidate, either an initial member or a child."""
    phase: str
    sample_index: int
    strategy: str
    child_fitness: float
    parent_fitness: Optional[float]
    best_fitness: float
    attempts_used: int
    accepted_by_model: bool
    predictor_queries: int
    fec_hit: bool
    cumulative_hill_climb_rate: Optional[float]
    structural_hash: str
    schema_version: str = SCHEMA_VERSION

    def to_row(self) -> List[str]:
        return [
            self.phase,
            str(self.sample_index),
            self.strategy,
            _fmt(self.child_fitness),
            _fmt(self.parent_fitness),
            _fmt(self.best_fitness),
            str(self.attempts_used),
            str(int(self.accepted_by_model)),
            str(self.predictor_queries),
            str(int(self.fec_hit)),
            _fmt(self.cumulative_hill_climb_rate),
            self.structural_hash,
            self.schema_version,
        ]

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "RunRecord":
        return cls(**data)


LOG_COLUMNS = [f.name for f in fields(RunRecord)]


def render_log_csv(records: List[RunRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(LOG_COLUMNS)
    for record in records:
        writer.writerow(record.to_row())
    return buffer.getvalue()


def _opt_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def parse_log_csv(text: str) -> List[RunRecord]:
    """
    Raises:
        AggregationError: If the header or schema version is not recognized
    """
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != LOG_COLUMNS:
        raise AggregationError("run log has unexpected columns", {"columns": reader.fieldnames})
    records = []
    for row in reader:
        if row["schema_version"] != SCHEMA_VERSION:
            raise AggregationError(f"unsupported run log schema {row['schema_version']!r}")
        records.append(RunRecord(
            phase=row["phase"],
            sample_index=int(row["sample_index"]),
            strategy=row["strategy"],
            child_fitness=float(row["child_fitness"]),
            parent_fitness=_opt_float(row["parent_fitness"]),
            best_fitness=float(row["best_fitness"]),
            attempts_used=int(row["attempts_used"]),
            accepted_by_model=row["accepted_by_model"] == "1",
            predictor_queries=int(row["predictor_queries"]),
            fec_hit=row["fec_hit"] == "1",
            cumulative_hill_climb_rate=_opt_float(row["cumulative_hill_climb_rate"]),
            structural_hash=row["structural_hash"],
        ))
    return records
