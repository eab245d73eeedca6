"""Run outcomes, per-setting campaign results and persisted run records."""

from dataclasses import dataclass, field
from typing import List

from .pmf import CountHistogram


@dataclass(frozen=True)
class RunOutcome:
    """One prepare/expose/readout/presence-check cycle.

    Attributes:
        jumped: True when the atom is in F2 at the start of the readout
        n_c: Observed readout count (meaningless when the atom was lost)
        atom_present: False when the atom was lost; such runs are discarded
        run_index: Index of the run within its setting
    """

    jumped: bool
    n_c: int
    atom_present: bool
    run_index: int


@dataclass(frozen=True)
class RunRecord:
    """One row of a persisted run dataset."""

    setting_id: int
    setting_value: float
    setting_unit: str
    run_index: int
    jumped: bool
    n_c: int
    atom_present: bool


@dataclass
class SettingResult:
    """All runs of one sweep setting, in run-index order.

    Attributes:
        setting_id: Position of the setting in the sweep
        setting_value: Probe photon number or duration
        setting_unit: Unit tag of setting_value
        outcomes: Run outcomes ordered by run_index
        threshold: Decision threshold used for D/ND, when one applies
    """

    setting_id: int
    setting_value: float
    setting_unit: str
    outcomes: List[RunOutcome] = field(default_factory=list)
    threshold: int = -1

    @property
    def retained(self) -> List[RunOutcome]:
        """Return the runs in which the atom was still present."""
        return [o for o in self.outcomes if o.atom_present]

    @property
    def retained_runs(self) -> int:
        """Return the number of retained runs."""
        return sum(1 for o in self.outcomes if o.atom_present)

    @property
    def histogram(self) -> CountHistogram:
        """Return the n_c histogram over retained runs."""
        return CountHistogram.from_values(o.n_c for o in self.retained)

    @property
    def detections(self) -> int:
        """Return the number of retained runs with n_c above the threshold."""
        if self.threshold < 0:
            raise ValueError("no decision threshold attached to this setting")
        return sum(1 for o in self.retained if o.n_c > self.threshold)

    @property
    def jumped_fraction(self) -> float:
        """Return the fraction of retained runs that jumped (0 when none retained)."""
        retained = self.retained
        if not retained:
            return 0.0
        return sum(1 for o in retained if o.jumped) / len(retained)

    @property
    def is_empty(self) -> bool:
        """Return True when every run lost its atom."""
        return self.retained_runs == 0

    def to_records(self) -> List[RunRecord]:
        """Return the runs as persistable records."""
        return [
            RunRecord(self.setting_id, self.setting_value, self.setting_unit, o.run_index, o.jumped, o.n_c, o.atom_present)
            for o in self.outcomes
        ]
